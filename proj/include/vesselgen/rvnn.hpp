#pragma once

#include "vesselgen/autodiff.hpp"
#include "vesselgen/tree.hpp"

#include <array>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vesselgen {

struct ModelConfig {
    int attr_dim = 4;
    int enc_hidden = 512;
    int embed_dim = 64;
    int latent_dim = 64;
    int dec_hidden = 256;
    int cls_hidden = 256;
    double leaky_slope = 0.01;
};

enum class NodeClass { Leaf = 0, OneChild = 1, Bifurcation = 2 };

inline NodeClass node_class(const VesselTree& t, int i) {
    const int d = t.degree(i);
    return d == 0 ? NodeClass::Leaf : (d == 1 ? NodeClass::OneChild : NodeClass::Bifurcation);
}

enum class Weighting { Uniform, Depth, Subtree };

// Recursive encoder/decoder parameter bundle. Layer handles index into the
// parameter store; insertion order fixes serialization and update order.
template <typename T>
struct RvnnModel {
    struct Layer {
        int W = -1;
        int b = -1;
    };

    ModelConfig cfg;
    ParamStore<T> params;

    // Encoder
    Layer enc_fc1, enc_fc2, enc_right1, enc_right2, enc_left1, enc_left2, enc_fc3;
    // f_mu / f_sigma: shared trunk plus separate heads
    Layer fmu_fc1, fmu_mu, fmu_var;
    // g_z
    Layer gz_fc1, gz_fc2, gz_fc3;
    // Decoder
    Layer dec_fc1, dec_left1, dec_left2, dec_right1, dec_right2, dec_fc2, dec_fc3;
    // Node classifier
    Layer cls_fc1, cls_fc2, cls_fc3;

    static RvnnModel make(const ModelConfig& cfg, Rng& rng) {
        if (cfg.embed_dim != cfg.latent_dim)
            throw std::runtime_error("model config requires embed_dim == latent_dim");
        RvnnModel m;
        m.cfg = cfg;
        auto layer = [&m](const std::string& name, int in, int out) {
            Layer l;
            l.W = m.params.add(name + ".W", {in, out});
            l.b = m.params.add(name + ".b", {out});
            return l;
        };
        const int A = cfg.attr_dim, H = cfg.enc_hidden, D = cfg.embed_dim, L = cfg.latent_dim;
        const int DH = cfg.dec_hidden, CH = cfg.cls_hidden;
        m.enc_fc1 = layer("enc.fc1", A, H);
        m.enc_fc2 = layer("enc.fc2", H, D);
        m.enc_right1 = layer("enc.right1", D, H);
        m.enc_right2 = layer("enc.right2", H, D);
        m.enc_left1 = layer("enc.left1", D, H);
        m.enc_left2 = layer("enc.left2", H, D);
        m.enc_fc3 = layer("enc.fc3", 2 * D, D);
        m.fmu_fc1 = layer("fmu.fc1", D, H);
        m.fmu_mu = layer("fmu.mu", H, L);
        m.fmu_var = layer("fmu.var", H, L);
        m.gz_fc1 = layer("gz.fc1", L, DH);
        m.gz_fc2 = layer("gz.fc2", DH, DH);
        m.gz_fc3 = layer("gz.fc3", DH, D);
        m.dec_fc1 = layer("dec.fc1", D, DH);
        m.dec_left1 = layer("dec.left1", DH, DH);
        m.dec_left2 = layer("dec.left2", DH, D);
        m.dec_right1 = layer("dec.right1", DH, DH);
        m.dec_right2 = layer("dec.right2", DH, D);
        m.dec_fc2 = layer("dec.fc2", DH, D);
        m.dec_fc3 = layer("dec.fc3", D, A);
        m.cls_fc1 = layer("cls.fc1", D, CH);
        m.cls_fc2 = layer("cls.fc2", CH, CH);
        m.cls_fc3 = layer("cls.fc3", CH, 3);
        m.params.init_uniform(rng);
        return m;
    }

    std::size_t component_param_count(const std::string& prefix) const {
        return params.value_count_prefix(prefix);
    }
};

namespace detail {

template <typename T>
using Id = typename Graph<T>::Id;

template <typename T>
Id<T> affine(Graph<T>& g, const typename RvnnModel<T>::Layer& l, Id<T> x) {
    return g.dense(x, g.param(l.W), g.param(l.b));
}

template <typename T>
Id<T> affine_lrelu(Graph<T>& g, const RvnnModel<T>& m, const typename RvnnModel<T>::Layer& l,
                   Id<T> x) {
    return g.leaky_relu(affine(g, l, x), static_cast<T>(m.cfg.leaky_slope));
}

template <typename T>
Id<T> affine_tanh(Graph<T>& g, const typename RvnnModel<T>::Layer& l, Id<T> x) {
    return g.tanh_op(affine(g, l, x));
}

} // namespace detail

template <typename T>
Tensor<T> attr_tensor(const VesselTree& t, int i) {
    const auto& a = t.attrs[i];
    return Tensor<T>{{4}, {static_cast<T>(a.x), static_cast<T>(a.y),
                           static_cast<T>(a.z), static_cast<T>(a.r)}};
}

// ---- Sequential (per-node recursive) evaluation -------------------------

// Post-order fold of the tree into a single D-dimensional embedding.
// An absent child contributes a zero vector at the summation point; the
// left/right branch networks only run where a child exists.
template <typename T>
typename Graph<T>::Id encode_tree(Graph<T>& g, const RvnnModel<T>& m, const VesselTree& t) {
    using Id = typename Graph<T>::Id;
    const Id zero = g.input(Tensor<T>::zeros({m.cfg.embed_dim}));

    struct Rec {
        Graph<T>& g;
        const RvnnModel<T>& m;
        const VesselTree& t;
        Id zero;

        Id encode(int node) {
            Id partial = detail::affine_lrelu(g, m, m.enc_fc1, g.input(attr_tensor<T>(t, node)));
            partial = detail::affine_lrelu(g, m, m.enc_fc2, partial);
            Id sum = -1;
            if (t.has_right(node)) {
                Id r = detail::affine_lrelu(g, m, m.enc_right1, encode(t.right[node]));
                sum = detail::affine_lrelu(g, m, m.enc_right2, r);
            }
            if (t.has_left(node)) {
                Id l = detail::affine_lrelu(g, m, m.enc_left1, encode(t.left[node]));
                l = detail::affine_lrelu(g, m, m.enc_left2, l);
                sum = sum == -1 ? l : g.add(sum, l);
            }
            if (sum == -1) sum = zero;
            return detail::affine_lrelu(g, m, m.enc_fc3, g.concat(partial, sum));
        }
    };
    return Rec{g, m, t, zero}.encode(t.root);
}

template <typename T>
struct LatentIds {
    typename Graph<T>::Id mu;
    typename Graph<T>::Id logvar;
};

template <typename T>
LatentIds<T> latent_params(Graph<T>& g, const RvnnModel<T>& m, typename Graph<T>::Id embedding) {
    const auto h = detail::affine_lrelu(g, m, m.fmu_fc1, embedding);
    return {detail::affine(g, m.fmu_mu, h), detail::affine(g, m.fmu_var, h)};
}

template <typename T>
typename Graph<T>::Id sample_latent(Graph<T>& g, typename Graph<T>::Id mu,
                                    typename Graph<T>::Id logvar, const Tensor<T>& eps) {
    return g.reparam(mu, logvar, g.input(eps));
}

template <typename T>
Tensor<T> draw_eps(int dim, Rng& rng) {
    Tensor<T> eps = Tensor<T>::zeros({dim});
    for (auto& v : eps.data) v = static_cast<T>(rng.normal());
    return eps;
}

template <typename T>
typename Graph<T>::Id sample_latent(Graph<T>& g, typename Graph<T>::Id mu,
                                    typename Graph<T>::Id logvar, Rng& rng) {
    return sample_latent(g, mu, logvar, draw_eps<T>(g.value(mu).cols(), rng));
}

template <typename T>
typename Graph<T>::Id apply_gz(Graph<T>& g, const RvnnModel<T>& m, typename Graph<T>::Id z) {
    auto h = detail::affine_tanh(g, m.gz_fc1, z);
    h = detail::affine_tanh(g, m.gz_fc2, h);
    return detail::affine_tanh(g, m.gz_fc3, h);
}

template <typename T>
struct DecodedNode {
    typename Graph<T>::Id attrs = -1;
    typename Graph<T>::Id logits = -1;
};

namespace detail {

// Shared per-node decoder block: latent -> (attrs, logits, hidden).
template <typename T>
DecodedNode<T> decode_node(Graph<T>& g, const RvnnModel<T>& m, Id<T> latent, Id<T>& hidden_out) {
    const Id<T> hidden = affine_lrelu(g, m, m.dec_fc1, latent);
    const Id<T> feature = affine_lrelu(g, m, m.dec_fc2, hidden);
    DecodedNode<T> out;
    out.attrs = affine(g, m.dec_fc3, feature);
    auto c = affine_lrelu(g, m, m.cls_fc1, feature);
    c = affine_lrelu(g, m, m.cls_fc2, c);
    out.logits = affine(g, m.cls_fc3, c);
    hidden_out = hidden;
    return out;
}

template <typename T>
Id<T> child_latent(Graph<T>& g, const RvnnModel<T>& m, Id<T> hidden, bool left) {
    const auto& l1 = left ? m.dec_left1 : m.dec_right1;
    const auto& l2 = left ? m.dec_left2 : m.dec_right2;
    return affine_lrelu(g, m, l2, affine_lrelu(g, m, l1, hidden));
}

} // namespace detail

// Decodes along the target topology (teacher forcing); output is indexed by
// target node id.
template <typename T>
std::vector<DecodedNode<T>> decode_teacher(Graph<T>& g, const RvnnModel<T>& m,
                                           typename Graph<T>::Id z, const VesselTree& target) {
    using Id = typename Graph<T>::Id;
    std::vector<DecodedNode<T>> out(target.size());

    struct Rec {
        Graph<T>& g;
        const RvnnModel<T>& m;
        const VesselTree& t;
        std::vector<DecodedNode<T>>& out;

        void decode(int node, Id latent) {
            Id hidden = -1;
            out[node] = detail::decode_node(g, m, latent, hidden);
            if (t.has_right(node))
                decode(t.right[node], detail::child_latent(g, m, hidden, false));
            if (t.has_left(node))
                decode(t.left[node], detail::child_latent(g, m, hidden, true));
        }
    };
    Rec rec{g, m, target, out};
    rec.decode(target.root, apply_gz(g, m, z));
    return out;
}

// Free-running decode: the classifier decides branching; a single child goes
// to the right slot; nodes at max_depth are forced to leaves. Attributes are
// in normalized space.
template <typename T>
VesselTree decode_free(const RvnnModel<T>& m, const Tensor<T>& z, int max_depth) {
    if (max_depth < 0) throw std::runtime_error("decode_free: max_depth must be >= 0");
    const ParamStore<T>* store = &m.params;
    Graph<T> g(store);
    using Id = typename Graph<T>::Id;

    VesselTree t;
    struct Item {
        Id latent;
        int depth;
        int parent; // -1 for root
        bool left;
    };
    std::deque<Item> queue{{apply_gz(g, m, g.input(z)), 0, -1, false}};
    while (!queue.empty()) {
        const Item it = queue.front();
        queue.pop_front();
        Id hidden = -1;
        const DecodedNode<T> dn = detail::decode_node(g, m, it.latent, hidden);
        const auto& av = g.value(dn.attrs).data;
        const int node = t.size();
        t.attrs.push_back({static_cast<double>(av[0]), static_cast<double>(av[1]),
                           static_cast<double>(av[2]), static_cast<double>(av[3])});
        t.left.push_back(-1);
        t.right.push_back(-1);
        if (it.parent >= 0) (it.left ? t.left[it.parent] : t.right[it.parent]) = node;

        const auto& logits = g.value(dn.logits).data;
        int cls = 0;
        for (int c = 1; c < 3; ++c) {
            if (logits[c] > logits[cls]) cls = c;
        }
        if (it.depth >= max_depth) cls = 0;
        if (cls >= 1)
            queue.push_back({detail::child_latent(g, m, hidden, false), it.depth + 1, node, false});
        if (cls == 2)
            queue.push_back({detail::child_latent(g, m, hidden, true), it.depth + 1, node, true});
    }
    t.root = 0;
    return t;
}

// ---- Loss terms ----------------------------------------------------------

// Inverse-frequency class weights over all nodes of the corpus, normalized
// to mean 1 over the classes that occur.
inline std::array<double, 3> class_weights(std::span<const VesselTree> trees) {
    std::array<long, 3> counts{0, 0, 0};
    long total = 0;
    for (const auto& t : trees) {
        for (int i = 0; i < t.size(); ++i) {
            ++counts[static_cast<int>(node_class(t, i))];
            ++total;
        }
    }
    std::array<double, 3> w{0.0, 0.0, 0.0};
    double sum = 0.0;
    int present = 0;
    for (int c = 0; c < 3; ++c) {
        if (counts[c] > 0) {
            w[c] = static_cast<double>(total) / static_cast<double>(counts[c]);
            sum += w[c];
            ++present;
        }
    }
    for (int c = 0; c < 3; ++c) {
        if (w[c] > 0.0) w[c] *= present / sum;
    }
    return w;
}

// Per-node weights for the topology loss, normalized to mean 1.
inline std::vector<double> node_weights(const VesselTree& t, Weighting scheme) {
    const int n = t.size();
    std::vector<double> w(n, 1.0);
    if (scheme == Weighting::Depth) {
        const auto depth = node_depths(t);
        const int h = tree_height(t);
        for (int i = 0; i < n; ++i) w[i] = static_cast<double>(h - depth[i] + 1);
    } else if (scheme == Weighting::Subtree) {
        // Subtree sizes via reverse BFS order.
        std::vector<int> order;
        order.reserve(n);
        std::deque<int> q{t.root};
        while (!q.empty()) {
            const int u = q.front();
            q.pop_front();
            order.push_back(u);
            for (int c : {t.left[u], t.right[u]}) {
                if (c != -1) q.push_back(c);
            }
        }
        std::vector<int> size(n, 1);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            for (int c : {t.left[*it], t.right[*it]}) {
                if (c != -1) size[*it] += size[c];
            }
        }
        for (int i = 0; i < n; ++i) w[i] = static_cast<double>(size[i]);
    }
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= n;
    for (double& v : w) v /= mean;
    return w;
}

// Mean over nodes of the squared L2 error between reconstructed and target
// attribute vectors.
template <typename T>
typename Graph<T>::Id loss_recon(Graph<T>& g, const std::vector<DecodedNode<T>>& decoded,
                                 const VesselTree& target) {
    typename Graph<T>::Id acc = -1;
    for (int i = 0; i < target.size(); ++i) {
        const auto term = g.squared_l2(decoded[i].attrs, g.input(attr_tensor<T>(target, i)));
        acc = acc == -1 ? term : g.add(acc, term);
    }
    return g.scale(acc, T(1) / static_cast<T>(target.size()));
}

// Mean over nodes of node_weight * class_weight * cross-entropy.
template <typename T>
typename Graph<T>::Id loss_topo(Graph<T>& g, const std::vector<DecodedNode<T>>& decoded,
                                const VesselTree& target, const std::array<double, 3>& class_w,
                                const std::vector<double>& node_w) {
    if (node_w.size() != static_cast<std::size_t>(target.size()))
        throw std::runtime_error("loss_topo: node weight count mismatch");
    typename Graph<T>::Id acc = -1;
    for (int i = 0; i < target.size(); ++i) {
        const int cls = static_cast<int>(node_class(target, i));
        const T w = static_cast<T>(node_w[i] * class_w[cls]);
        const auto term = g.softmax_ce(decoded[i].logits, cls, w);
        acc = acc == -1 ? term : g.add(acc, term);
    }
    return g.scale(acc, T(1) / static_cast<T>(target.size()));
}

template <typename T>
typename Graph<T>::Id loss_kl(Graph<T>& g, typename Graph<T>::Id mu, typename Graph<T>::Id logvar) {
    return g.gaussian_kl(mu, logvar);
}

// (1 - alpha) * recon + alpha * topo + gamma * kl
template <typename T>
typename Graph<T>::Id loss_total(Graph<T>& g, typename Graph<T>::Id recon,
                                 typename Graph<T>::Id topo, typename Graph<T>::Id kl,
                                 double alpha, double gamma) {
    if (alpha < 0.0 || alpha > 1.0 || gamma < 0.0)
        throw std::runtime_error("loss_total: alpha in [0,1], gamma >= 0 required");
    auto s = g.add(g.scale(recon, static_cast<T>(1.0 - alpha)), g.scale(topo, static_cast<T>(alpha)));
    return g.add(s, g.scale(kl, static_cast<T>(gamma)));
}

// ---- Dynamic batching -----------------------------------------------------

struct NodeRef {
    int tree;
    int node;
};

// Nodes of a batch grouped by depth (group[d] holds all depth-d nodes).
// Encoding consumes groups deepest-first, decoding root-first.
struct DepthSchedule {
    std::vector<std::vector<NodeRef>> groups;
};

inline DepthSchedule build_depth_schedule(std::span<const VesselTree> batch) {
    if (batch.empty()) throw std::runtime_error("build_depth_schedule: empty batch");
    DepthSchedule s;
    for (int ti = 0; ti < static_cast<int>(batch.size()); ++ti) {
        const auto depth = node_depths(batch[ti]);
        for (int i = 0; i < batch[ti].size(); ++i) {
            const int d = depth[i];
            if (d >= static_cast<int>(s.groups.size())) s.groups.resize(d + 1);
            s.groups[d].push_back({ti, i});
        }
    }
    return s;
}

// Batched encoder: every dense layer runs once per depth level on stacked
// rows. Results match the sequential encoder row for row.
template <typename T>
std::vector<typename Graph<T>::Id> encode_batch(Graph<T>& g, const RvnnModel<T>& m,
                                                std::span<const VesselTree> batch) {
    using Id = typename Graph<T>::Id;
    const DepthSchedule sched = build_depth_schedule(batch);
    const Id zero = g.input(Tensor<T>::zeros({m.cfg.embed_dim}));

    // (matrix id, row) of each node's embedding, filled deepest level first.
    std::vector<std::vector<std::pair<Id, int>>> ref(batch.size());
    for (std::size_t ti = 0; ti < batch.size(); ++ti) ref[ti].resize(batch[ti].size(), {-1, -1});

    for (int d = static_cast<int>(sched.groups.size()) - 1; d >= 0; --d) {
        const auto& group = sched.groups[d];
        const int k = static_cast<int>(group.size());

        Tensor<T> attr_mat = Tensor<T>::zeros({k, m.cfg.attr_dim});
        for (int i = 0; i < k; ++i) {
            const auto row = attr_tensor<T>(batch[group[i].tree], group[i].node);
            std::copy(row.data.begin(), row.data.end(),
                      attr_mat.data.begin() + static_cast<std::size_t>(i) * m.cfg.attr_dim);
        }
        Id partial = detail::affine_lrelu(g, m, m.enc_fc1, g.input(std::move(attr_mat)));
        partial = detail::affine_lrelu(g, m, m.enc_fc2, partial);

        std::vector<Id> right_rows, left_rows;
        std::vector<int> right_pos(k, -1), left_pos(k, -1);
        for (int i = 0; i < k; ++i) {
            const auto& t = batch[group[i].tree];
            if (t.has_right(group[i].node)) {
                const auto [mat, row] = ref[group[i].tree][t.right[group[i].node]];
                right_pos[i] = static_cast<int>(right_rows.size());
                right_rows.push_back(g.row(mat, row));
            }
            if (t.has_left(group[i].node)) {
                const auto [mat, row] = ref[group[i].tree][t.left[group[i].node]];
                left_pos[i] = static_cast<int>(left_rows.size());
                left_rows.push_back(g.row(mat, row));
            }
        }
        Id right_mat = -1, left_mat = -1;
        if (!right_rows.empty()) {
            right_mat = detail::affine_lrelu(g, m, m.enc_right1, g.stack_rows(right_rows));
            right_mat = detail::affine_lrelu(g, m, m.enc_right2, right_mat);
        }
        if (!left_rows.empty()) {
            left_mat = detail::affine_lrelu(g, m, m.enc_left1, g.stack_rows(left_rows));
            left_mat = detail::affine_lrelu(g, m, m.enc_left2, left_mat);
        }

        std::vector<Id> sums(k);
        for (int i = 0; i < k; ++i) {
            if (right_pos[i] >= 0 && left_pos[i] >= 0)
                sums[i] = g.add(g.row(right_mat, right_pos[i]), g.row(left_mat, left_pos[i]));
            else if (right_pos[i] >= 0)
                sums[i] = g.row(right_mat, right_pos[i]);
            else if (left_pos[i] >= 0)
                sums[i] = g.row(left_mat, left_pos[i]);
            else
                sums[i] = zero;
        }
        const Id embed =
            detail::affine_lrelu(g, m, m.enc_fc3, g.concat(partial, g.stack_rows(sums)));
        for (int i = 0; i < k; ++i) ref[group[i].tree][group[i].node] = {embed, i};
    }

    std::vector<Id> roots(batch.size());
    for (std::size_t ti = 0; ti < batch.size(); ++ti) {
        const auto [mat, row] = ref[ti][batch[ti].root];
        roots[ti] = g.row(mat, row);
    }
    return roots;
}

// Batched teacher-forced decoder over the target topologies; zs holds one
// sampled latent per tree.
template <typename T>
std::vector<std::vector<DecodedNode<T>>> decode_batch_teacher(
    Graph<T>& g, const RvnnModel<T>& m, const std::vector<typename Graph<T>::Id>& zs,
    std::span<const VesselTree> batch) {
    using Id = typename Graph<T>::Id;
    if (zs.size() != batch.size()) throw std::runtime_error("decode_batch_teacher: size mismatch");
    const DepthSchedule sched = build_depth_schedule(batch);

    std::vector<std::vector<DecodedNode<T>>> out(batch.size());
    for (std::size_t ti = 0; ti < batch.size(); ++ti) out[ti].resize(batch[ti].size());

    // Latent source (matrix id, row) per node, filled as parents are decoded.
    std::vector<std::vector<std::pair<Id, int>>> lat(batch.size());
    for (std::size_t ti = 0; ti < batch.size(); ++ti) lat[ti].resize(batch[ti].size(), {-1, -1});

    const Id root_lat = apply_gz(g, m, g.stack_rows(zs));
    for (std::size_t ti = 0; ti < batch.size(); ++ti)
        lat[ti][batch[ti].root] = {root_lat, static_cast<int>(ti)};

    for (std::size_t d = 0; d < sched.groups.size(); ++d) {
        const auto& group = sched.groups[d];
        const int k = static_cast<int>(group.size());

        std::vector<Id> lat_rows(k);
        for (int i = 0; i < k; ++i) {
            const auto [mat, row] = lat[group[i].tree][group[i].node];
            lat_rows[i] = g.row(mat, row);
        }
        const Id latents = g.stack_rows(lat_rows);
        const Id hidden = detail::affine_lrelu(g, m, m.dec_fc1, latents);
        const Id feature = detail::affine_lrelu(g, m, m.dec_fc2, hidden);
        const Id attrs = detail::affine(g, m.dec_fc3, feature);
        Id c = detail::affine_lrelu(g, m, m.cls_fc1, feature);
        c = detail::affine_lrelu(g, m, m.cls_fc2, c);
        const Id logits = detail::affine(g, m.cls_fc3, c);
        for (int i = 0; i < k; ++i) {
            out[group[i].tree][group[i].node] = {g.row(attrs, i), g.row(logits, i)};
        }

        std::vector<Id> right_rows, left_rows;
        std::vector<NodeRef> right_children, left_children;
        for (int i = 0; i < k; ++i) {
            const auto& t = batch[group[i].tree];
            if (t.has_right(group[i].node)) {
                right_rows.push_back(g.row(hidden, i));
                right_children.push_back({group[i].tree, t.right[group[i].node]});
            }
            if (t.has_left(group[i].node)) {
                left_rows.push_back(g.row(hidden, i));
                left_children.push_back({group[i].tree, t.left[group[i].node]});
            }
        }
        if (!right_rows.empty()) {
            Id rl = detail::affine_lrelu(g, m, m.dec_right1, g.stack_rows(right_rows));
            rl = detail::affine_lrelu(g, m, m.dec_right2, rl);
            for (std::size_t i = 0; i < right_children.size(); ++i)
                lat[right_children[i].tree][right_children[i].node] = {rl, static_cast<int>(i)};
        }
        if (!left_rows.empty()) {
            Id ll = detail::affine_lrelu(g, m, m.dec_left1, g.stack_rows(left_rows));
            ll = detail::affine_lrelu(g, m, m.dec_left2, ll);
            for (std::size_t i = 0; i < left_children.size(); ++i)
                lat[left_children[i].tree][left_children[i].node] = {ll, static_cast<int>(i)};
        }
    }
    return out;
}

} // namespace vesselgen
