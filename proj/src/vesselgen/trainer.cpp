#include "vesselgen/trainer.hpp"

#include "vesselgen/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace vesselgen {

namespace {

std::string hexfloat(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_hexfloat(const std::string& tok) {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::runtime_error("bad numeric token '" + tok + "'");
    return v;
}

void require(bool ok, const char* what) {
    if (!ok) throw std::runtime_error(std::string("corrupt checkpoint: ") + what);
}

} // namespace

std::string to_string(Weighting w) {
    switch (w) {
    case Weighting::Uniform: return "uniform";
    case Weighting::Depth: return "depth";
    case Weighting::Subtree: return "subtree";
    }
    return "uniform";
}

Weighting weighting_from_string(const std::string& s) {
    if (s == "uniform") return Weighting::Uniform;
    if (s == "depth") return Weighting::Depth;
    if (s == "subtree") return Weighting::Subtree;
    throw std::runtime_error("unknown weighting scheme '" + s + "'");
}

TrainConfig parse_train_config(const std::string& text, const TrainConfig& base) {
    TrainConfig c = base;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key, eq, value;
        if (!(ls >> key)) continue;
        if (!(ls >> eq >> value) || eq != "=")
            throw std::runtime_error("config line must be 'key = value': " + line);
        if (key == "batch_size") c.batch_size = std::stoi(value);
        else if (key == "lr") c.lr = std::stod(value);
        else if (key == "beta1") c.beta1 = std::stod(value);
        else if (key == "beta2") c.beta2 = std::stod(value);
        else if (key == "adam_eps") c.adam_eps = std::stod(value);
        else if (key == "alpha") c.alpha = std::stod(value);
        else if (key == "gamma") c.gamma = std::stod(value);
        else if (key == "epochs") c.epochs = std::stoi(value);
        else if (key == "weighting") c.weighting = weighting_from_string(value);
        else if (key == "max_height") c.max_height = std::stoi(value);
        else if (key == "epsilon") c.epsilon = std::stod(value);
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "checkpoint_interval") c.checkpoint_interval = std::stoi(value);
        else throw std::runtime_error("unknown config key '" + key + "'");
    }
    if (c.batch_size <= 0 || c.lr <= 0.0 || c.epochs < 0 || c.alpha < 0.0 || c.alpha > 1.0 ||
        c.gamma < 0.0)
        throw std::runtime_error("invalid training config values");
    return c;
}

std::string format_train_config(const TrainConfig& c) {
    char buf[640];
    std::snprintf(buf, sizeof buf,
                  "batch_size = %d\nlr = %.17g\nbeta1 = %.17g\nbeta2 = %.17g\n"
                  "adam_eps = %.17g\nalpha = %.17g\ngamma = %.17g\nepochs = %d\n"
                  "weighting = %s\nmax_height = %d\nepsilon = %.17g\nseed = %llu\n"
                  "checkpoint_interval = %d\n",
                  c.batch_size, c.lr, c.beta1, c.beta2, c.adam_eps, c.alpha, c.gamma, c.epochs,
                  to_string(c.weighting).c_str(), c.max_height, c.epsilon,
                  static_cast<unsigned long long>(c.seed), c.checkpoint_interval);
    return buf;
}

TrainState init_training(const TrainConfig& tcfg, const ModelConfig& mcfg, const NormParams& norm) {
    TrainState s;
    s.mcfg = mcfg;
    s.tcfg = tcfg;
    s.norm = norm;
    Rng init_rng(derive_seed(tcfg.seed, 0));
    s.model = RvnnModel<float>::make(mcfg, init_rng);
    s.rng = Rng(derive_seed(tcfg.seed, 1));
    s.epoch = 0;
    return s;
}

namespace {

void check_normalized(const std::vector<CorpusEntry>& corpus) {
    for (const auto& e : corpus) {
        for (const auto& a : e.tree.attrs) {
            for (double v : {a.x, a.y, a.z, a.r}) {
                if (v < -1e-6 || v > 1.0 + 1e-6)
                    throw std::runtime_error("corpus is not normalized (tree '" + e.name +
                                             "' has attribute " + std::to_string(v) + ")");
            }
        }
    }
}

struct BatchLosses {
    double recon = 0.0;
    double topo = 0.0;
    double kl = 0.0;
    double total = 0.0;
};

} // namespace

void train_epochs(TrainState& state, const std::vector<CorpusEntry>& corpus, int epochs,
                  std::vector<EpochRecord>* curve,
                  const std::function<void(const TrainState&)>& after_epoch) {
    if (corpus.empty()) throw std::runtime_error("train: empty corpus");
    check_normalized(corpus);

    std::vector<VesselTree> trees;
    trees.reserve(corpus.size());
    for (const auto& e : corpus) trees.push_back(e.tree);
    const auto class_w = class_weights(trees);
    std::vector<std::vector<double>> node_w;
    node_w.reserve(trees.size());
    for (const auto& t : trees) node_w.push_back(node_weights(t, state.tcfg.weighting));

    const auto& tc = state.tcfg;
    std::vector<int> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);

    for (int e = 0; e < epochs; ++e) {
        state.rng.shuffle(order);
        double sum_recon = 0.0, sum_topo = 0.0, sum_kl = 0.0, sum_total = 0.0;

        for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
            const std::size_t stop = std::min(order.size(), start + tc.batch_size);
            const int bsz = static_cast<int>(stop - start);
            std::vector<VesselTree> batch;
            std::vector<const std::vector<double>*> batch_nw;
            std::vector<const std::string*> batch_names;
            batch.reserve(bsz);
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(trees[order[i]]);
                batch_nw.push_back(&node_w[order[i]]);
                batch_names.push_back(&corpus[order[i]].name);
            }

            // One noise draw per tree, in batch order, before graph build.
            std::vector<Tensor<float>> eps;
            eps.reserve(bsz);
            for (int i = 0; i < bsz; ++i)
                eps.push_back(draw_eps<float>(state.mcfg.latent_dim, state.rng));

            try {
                Graph<float> g(&state.model.params);
                const auto roots = encode_batch(g, state.model, std::span<const VesselTree>(batch));
                const auto embed_mat = g.stack_rows(roots);
                const auto lat = latent_params(g, state.model, embed_mat);

                Graph<float>::Id batch_loss = -1;
                std::vector<Graph<float>::Id> zs(bsz);
                std::vector<LatentIds<float>> lat_rows(bsz);
                for (int i = 0; i < bsz; ++i) {
                    lat_rows[i] = {g.row(lat.mu, i), g.row(lat.logvar, i)};
                    zs[i] = sample_latent(g, lat_rows[i].mu, lat_rows[i].logvar, eps[i]);
                }
                const auto decoded = decode_batch_teacher(g, state.model, zs,
                                                          std::span<const VesselTree>(batch));

                BatchLosses bl;
                for (int i = 0; i < bsz; ++i) {
                    const auto recon = loss_recon(g, decoded[i], batch[i]);
                    const auto topo = loss_topo(g, decoded[i], batch[i], class_w, *batch_nw[i]);
                    const auto kl = loss_kl(g, lat_rows[i].mu, lat_rows[i].logvar);
                    const auto total = loss_total(g, recon, topo, kl, tc.alpha, tc.gamma);
                    const double tv = g.value(total).data[0];
                    if (!std::isfinite(tv))
                        throw NumericalError("non-finite loss for tree '" + *batch_names[i] +
                                                 "' at epoch " + std::to_string(state.epoch));
                    bl.recon += g.value(recon).data[0];
                    bl.topo += g.value(topo).data[0];
                    bl.kl += g.value(kl).data[0];
                    bl.total += tv;
                    batch_loss = batch_loss == -1 ? total : g.add(batch_loss, total);
                }
                batch_loss = g.scale(batch_loss, 1.0f / static_cast<float>(bsz));

                g.backward(batch_loss);
                state.model.params.adam_step(tc.lr, tc.beta1, tc.beta2, tc.adam_eps);

                sum_recon += bl.recon;
                sum_topo += bl.topo;
                sum_kl += bl.kl;
                sum_total += bl.total;
            } catch (const NumericalError& err) {
                std::string names;
                for (const auto* n : batch_names) names += (names.empty() ? "" : ", ") + *n;
                throw NumericalError(std::string(err.what()) + " [batch trees: " + names + "]");
            }
        }

        ++state.epoch;
        if (curve) {
            const double n = static_cast<double>(corpus.size());
            curve->push_back({state.epoch, sum_recon / n, sum_topo / n, sum_kl / n, sum_total / n});
        }
        if (after_epoch) after_epoch(state);
    }
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state) {
    std::ostringstream os;
    os << "vesselgen-checkpoint 1\n";
    os << "dtype float32\n";
    os << "epoch " << state.epoch << "\n";
    os << "adam_step " << state.model.params.step_count() << "\n";
    const auto& mc = state.mcfg;
    char buf[256];
    std::snprintf(buf, sizeof buf, "model %d %d %d %d %d %d %s\n", mc.attr_dim, mc.enc_hidden,
                  mc.embed_dim, mc.latent_dim, mc.dec_hidden, mc.cls_hidden,
                  hexfloat(mc.leaky_slope).c_str());
    os << buf;
    os << "trainconfig\n" << format_train_config(state.tcfg) << "endconfig\n";
    std::snprintf(buf, sizeof buf, "norm %s %s %s %s\n", hexfloat(state.norm.spatial_min).c_str(),
                  hexfloat(state.norm.spatial_max).c_str(), hexfloat(state.norm.r_min).c_str(),
                  hexfloat(state.norm.r_max).c_str());
    os << buf;
    os << "rng\n";
    state.rng.save(os);

    const auto& ps = state.model.params;
    os << "params " << ps.count() << "\n";
    for (int h = 0; h < ps.count(); ++h) {
        const auto& e = ps.entry(h);
        os << "name " << e.name << " shape " << e.value.rank();
        for (int d : e.value.shape) os << ' ' << d;
        os << '\n';
        auto dump = [&os](const char* tag, const auto& tensor) {
            os << tag;
            for (float v : tensor.data) os << ' ' << hexfloat(v);
            os << '\n';
        };
        dump("value", e.value);
        dump("m", e.m);
        dump("v", e.v);
    }

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + tmp);
        f << os.str();
        if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

TrainState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint " + path.string());
    std::string tok;

    f >> tok;
    require(bool(f), "missing header");
    if (tok != "vesselgen-checkpoint")
        throw std::runtime_error("not a vesselgen checkpoint: " + path.string());
    f >> tok;
    if (tok != "1") throw std::runtime_error("unsupported checkpoint version " + tok);
    f >> tok;
    require(tok == "dtype", "dtype");
    f >> tok;
    require(tok == "float32", "dtype value");

    TrainState s;
    long adam_step = 0;
    f >> tok >> s.epoch;
    require(tok == "epoch", "epoch");
    f >> tok >> adam_step;
    require(tok == "adam_step", "adam_step");

    f >> tok;
    require(tok == "model", "model line");
    auto& mc = s.mcfg;
    f >> mc.attr_dim >> mc.enc_hidden >> mc.embed_dim >> mc.latent_dim >> mc.dec_hidden >>
        mc.cls_hidden >> tok;
    mc.leaky_slope = parse_hexfloat(tok);

    f >> tok;
    require(tok == "trainconfig", "trainconfig");
    std::string cfg_text, line;
    std::getline(f, line);
    while (std::getline(f, line) && line != "endconfig") cfg_text += line + "\n";
    require(line == "endconfig", "endconfig");
    s.tcfg = parse_train_config(cfg_text);

    f >> tok;
    require(tok == "norm", "norm");
    std::string a, b, c, d;
    f >> a >> b >> c >> d;
    s.norm = {parse_hexfloat(a), parse_hexfloat(b), parse_hexfloat(c), parse_hexfloat(d)};

    f >> tok;
    require(tok == "rng", "rng");
    s.rng.load(f);

    int count = 0;
    f >> tok >> count;
    require(tok == "params", "params");

    // Rebuild the model skeleton, then overwrite every buffer from the file.
    Rng dummy(0);
    s.model = RvnnModel<float>::make(s.mcfg, dummy);
    require(count == s.model.params.count(), "parameter count");
    for (int h = 0; h < count; ++h) {
        std::string name;
        int rank = 0;
        f >> tok >> name >> tok >> rank;
        require(bool(f) && tok == "shape", "param header");
        std::vector<int> shape(rank);
        for (auto& dd : shape) f >> dd;
        const int handle = s.model.params.find(name);
        require(handle == h, "parameter order");
        auto& e = s.model.params.entry(handle);
        require(e.value.shape == shape, "parameter shape");
        auto read_into = [&f](const char* tag, auto& tensor) {
            std::string t;
            f >> t;
            require(t == tag, "param section tag");
            for (auto& v : tensor.data) {
                std::string num;
                f >> num;
                v = static_cast<float>(parse_hexfloat(num));
            }
        };
        read_into("value", e.value);
        read_into("m", e.m);
        read_into("v", e.v);
    }
    require(bool(f), "truncated file");
    s.model.params.set_step_count(adam_step);
    return s;
}

Tensor<float> tree_mu(const RvnnModel<float>& model, const VesselTree& tree) {
    const ParamStore<float>* ps = &model.params;
    Graph<float> g(ps);
    const auto embed = encode_tree(g, model, tree);
    const auto lat = latent_params(g, model, embed);
    return g.value(lat.mu);
}

TeacherEval evaluate_teacher_at_mu(const RvnnModel<float>& model, const VesselTree& tree) {
    const ParamStore<float>* ps = &model.params;
    Graph<float> g(ps);
    const auto embed = encode_tree(g, model, tree);
    const auto lat = latent_params(g, model, embed);
    const auto decoded = decode_teacher(g, model, lat.mu, tree);

    TeacherEval ev;
    ev.total_nodes = tree.size();
    double sum = 0.0;
    for (int i = 0; i < tree.size(); ++i) {
        const auto& ahat = g.value(decoded[i].attrs).data;
        const auto target = attr_tensor<float>(tree, i);
        for (int k = 0; k < 4; ++k) {
            const double dd = static_cast<double>(ahat[k]) - static_cast<double>(target.data[k]);
            sum += dd * dd;
        }
        const auto& logits = g.value(decoded[i].logits).data;
        int argmax = 0;
        for (int c = 1; c < 3; ++c) {
            if (logits[c] > logits[argmax]) argmax = c;
        }
        if (argmax == static_cast<int>(node_class(tree, i))) ++ev.correct_nodes;
    }
    ev.recon = sum / tree.size();
    return ev;
}

} // namespace vesselgen
