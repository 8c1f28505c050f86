#pragma once

#include "vesselgen/errors.hpp"
#include "vesselgen/rng.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vesselgen {

// Dense row-major tensor. Scalars are shape {1}, vectors {n}, matrices
// {rows, cols}; nothing higher-rank is needed here.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    Tensor(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {}

    static Tensor scalar(T v) { return {{1}, {v}}; }
    static Tensor zeros(std::vector<int> s) {
        std::size_t n = 1;
        for (int d : s) n *= static_cast<std::size_t>(d);
        return {std::move(s), std::vector<T>(n, T(0))};
    }

    int rank() const { return static_cast<int>(shape.size()); }
    int rows() const { return rank() == 2 ? shape[0] : 1; }
    int cols() const { return shape.back(); }
    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// Named trainable parameters with gradient and Adam moment buffers.
// Iteration order is insertion order, which the model builder keeps fixed,
// so updates and serialization are deterministic.
template <typename T>
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor<T> value;
        Tensor<T> grad;
        Tensor<T> m;
        Tensor<T> v;
    };

    int add(const std::string& name, std::vector<int> shape) {
        if (index_.count(name)) throw std::runtime_error("duplicate parameter " + name);
        Entry e;
        e.name = name;
        e.value = Tensor<T>::zeros(shape);
        e.grad = Tensor<T>::zeros(shape);
        e.m = Tensor<T>::zeros(shape);
        e.v = Tensor<T>::zeros(std::move(shape));
        index_[name] = static_cast<int>(entries_.size());
        entries_.push_back(std::move(e));
        return static_cast<int>(entries_.size()) - 1;
    }

    int find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : it->second;
    }

    Entry& entry(int h) { return entries_.at(h); }
    const Entry& entry(int h) const { return entries_.at(h); }
    int count() const { return static_cast<int>(entries_.size()); }
    long step_count() const { return step_; }
    void set_step_count(long t) { step_ = t; }

    std::size_t value_count() const {
        std::size_t n = 0;
        for (const auto& e : entries_) n += e.value.size();
        return n;
    }

    std::size_t value_count_prefix(const std::string& prefix) const {
        std::size_t n = 0;
        for (const auto& e : entries_) {
            if (e.name.rfind(prefix, 0) == 0) n += e.value.size();
        }
        return n;
    }

    // Matrices get U(-a, a) with a = sqrt(6 / (n_in + n_out)); biases stay 0.
    void init_uniform(Rng& rng) {
        for (auto& e : entries_) {
            if (e.value.rank() != 2) continue;
            const double a = std::sqrt(6.0 / (e.value.shape[0] + e.value.shape[1]));
            for (auto& w : e.value.data) w = static_cast<T>(rng.uniform(-a, a));
        }
    }

    void zero_grads() {
        for (auto& e : entries_) std::fill(e.grad.data.begin(), e.grad.data.end(), T(0));
    }

    // Bias-corrected Adam step on all parameters; gradients are zeroed after.
    void adam_step(double lr, double beta1, double beta2, double eps) {
        ++step_;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
        for (auto& e : entries_) {
            T* x = e.value.data.data();
            T* g = e.grad.data.data();
            T* m = e.m.data.data();
            T* v = e.v.data.data();
            const std::size_t n = e.value.size();
            for (std::size_t i = 0; i < n; ++i) {
                m[i] = static_cast<T>(beta1 * m[i] + (1.0 - beta1) * g[i]);
                v[i] = static_cast<T>(beta2 * v[i] + (1.0 - beta2) * g[i] * g[i]);
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                x[i] = static_cast<T>(x[i] - lr * mhat / (std::sqrt(vhat) + eps));
            }
            std::fill(e.grad.data.begin(), e.grad.data.end(), T(0));
        }
    }

private:
    std::vector<Entry> entries_;
    std::map<std::string, int> index_;
    long step_ = 0;
};

enum class OpKind {
    Input,
    Param,
    Dense,
    LeakyRelu,
    Tanh,
    Add,
    Concat,
    Row,
    StackRows,
    Scale,
    SquaredL2,
    SoftmaxCE,
    Reparam,
    GaussianKl,
};

// Recorded computation tape over one forward pass. Construction order is a
// topological order, so the reverse sweep is a single backward scan.
// A graph is single-owner; independent graphs may run on separate threads.
template <typename T>
class Graph {
public:
    using Id = int;

    Graph() : cstore_(nullptr), store_(nullptr) {}
    // Trainable: backward() accumulates into the store.
    explicit Graph(ParamStore<T>* store) : cstore_(store), store_(store) {}
    // Read-only: parameter values may be used but backward() is rejected.
    explicit Graph(const ParamStore<T>* store) : cstore_(store), store_(nullptr) {}

    bool check_finite = true;

    Id input(Tensor<T> v) {
        Node n;
        n.kind = OpKind::Input;
        n.val = std::move(v);
        return push(std::move(n));
    }

    // Leaf referencing a store entry; memoized so each parameter appears once.
    Id param(int handle) {
        auto it = param_ids_.find(handle);
        if (it != param_ids_.end()) return it->second;
        if (!cstore_) throw std::runtime_error("graph has no parameter store");
        Node n;
        n.kind = OpKind::Param;
        n.param = handle;
        n.val = cstore_->entry(handle).value;
        const Id id = push(std::move(n));
        param_ids_[handle] = id;
        return id;
    }

    // y = x W + b with x of shape {n} or {batch, n}.
    Id dense(Id x, Id W, Id b) {
        const auto& xv = val(x);
        const auto& wv = val(W);
        const auto& bv = val(b);
        if (wv.rank() != 2 || bv.rank() != 1 || xv.cols() != wv.shape[0] || wv.shape[1] != bv.shape[0])
            throw std::runtime_error("dense: shape mismatch");
        const int rows = xv.rows(), in = wv.shape[0], out = wv.shape[1];
        Node n;
        n.kind = OpKind::Dense;
        n.a = x;
        n.b = W;
        n.c = b;
        n.val = xv.rank() == 2 ? Tensor<T>::zeros({rows, out}) : Tensor<T>::zeros({out});
        const T* xd = xv.data.data();
        const T* wd = wv.data.data();
        T* yd = n.val.data.data();
        for (int i = 0; i < rows; ++i) {
            T* yi = yd + static_cast<std::size_t>(i) * out;
            for (int j = 0; j < out; ++j) yi[j] = bv.data[j];
            const T* xi = xd + static_cast<std::size_t>(i) * in;
            for (int k = 0; k < in; ++k) {
                const T xk = xi[k];
                const T* wk = wd + static_cast<std::size_t>(k) * out;
                for (int j = 0; j < out; ++j) yi[j] += xk * wk[j];
            }
        }
        return push(std::move(n));
    }

    Id leaky_relu(Id x, T slope) {
        Node n;
        n.kind = OpKind::LeakyRelu;
        n.a = x;
        n.scalar0 = slope;
        n.val = val(x);
        for (auto& v : n.val.data) v = v > T(0) ? v : slope * v;
        return push(std::move(n));
    }

    Id tanh_op(Id x) {
        Node n;
        n.kind = OpKind::Tanh;
        n.a = x;
        n.val = val(x);
        for (auto& v : n.val.data) v = std::tanh(v);
        return push(std::move(n));
    }

    Id add(Id a, Id b) {
        if (!val(a).same_shape(val(b))) throw std::runtime_error("add: shape mismatch");
        Node n;
        n.kind = OpKind::Add;
        n.a = a;
        n.b = b;
        n.val = val(a);
        const T* bd = val(b).data.data();
        for (std::size_t i = 0; i < n.val.size(); ++i) n.val.data[i] += bd[i];
        return push(std::move(n));
    }

    // Concatenates along the last dimension (equal row counts for matrices).
    Id concat(Id a, Id b) {
        const auto& av = val(a);
        const auto& bv = val(b);
        if (av.rank() != bv.rank() || av.rows() != bv.rows())
            throw std::runtime_error("concat: shape mismatch");
        const int rows = av.rows(), ca = av.cols(), cb = bv.cols();
        Node n;
        n.kind = OpKind::Concat;
        n.a = a;
        n.b = b;
        n.val = av.rank() == 2 ? Tensor<T>::zeros({rows, ca + cb}) : Tensor<T>::zeros({ca + cb});
        for (int i = 0; i < rows; ++i) {
            T* y = n.val.data.data() + static_cast<std::size_t>(i) * (ca + cb);
            const T* pa = av.data.data() + static_cast<std::size_t>(i) * ca;
            const T* pb = bv.data.data() + static_cast<std::size_t>(i) * cb;
            for (int j = 0; j < ca; ++j) y[j] = pa[j];
            for (int j = 0; j < cb; ++j) y[ca + j] = pb[j];
        }
        return push(std::move(n));
    }

    Id row(Id x, int r) {
        const auto& xv = val(x);
        if (xv.rank() != 2 || r < 0 || r >= xv.shape[0]) throw std::runtime_error("row: out of range");
        const int c = xv.shape[1];
        Node n;
        n.kind = OpKind::Row;
        n.a = x;
        n.iarg = r;
        n.val = Tensor<T>{{c}, {xv.data.begin() + static_cast<std::size_t>(r) * c,
                                xv.data.begin() + static_cast<std::size_t>(r + 1) * c}};
        return push(std::move(n));
    }

    Id stack_rows(const std::vector<Id>& rows) {
        if (rows.empty()) throw std::runtime_error("stack_rows: empty");
        const int c = val(rows[0]).cols();
        Node n;
        n.kind = OpKind::StackRows;
        n.list = rows;
        n.val = Tensor<T>::zeros({static_cast<int>(rows.size()), c});
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& rv = val(rows[i]);
            if (rv.rank() != 1 || rv.cols() != c) throw std::runtime_error("stack_rows: shape mismatch");
            std::copy(rv.data.begin(), rv.data.end(), n.val.data.begin() + i * c);
        }
        return push(std::move(n));
    }

    Id scale(Id x, T c) {
        Node n;
        n.kind = OpKind::Scale;
        n.a = x;
        n.scalar0 = c;
        n.val = val(x);
        for (auto& v : n.val.data) v *= c;
        return push(std::move(n));
    }

    // Sum of squared differences over all elements.
    Id squared_l2(Id a, Id b) {
        if (!val(a).same_shape(val(b))) throw std::runtime_error("squared_l2: shape mismatch");
        T s = T(0);
        const T* pa = val(a).data.data();
        const T* pb = val(b).data.data();
        for (std::size_t i = 0; i < val(a).size(); ++i) {
            const T d = pa[i] - pb[i];
            s += d * d;
        }
        Node n;
        n.kind = OpKind::SquaredL2;
        n.a = a;
        n.b = b;
        n.val = Tensor<T>::scalar(s);
        return push(std::move(n));
    }

    // weight * (logsumexp(logits) - logits[target]), numerically stable.
    Id softmax_ce(Id logits, int target, T weight) {
        const auto& lv = val(logits);
        if (lv.rank() != 1) throw std::runtime_error("softmax_ce: logits must be a vector");
        if (target < 0 || target >= lv.cols()) throw std::runtime_error("softmax_ce: bad target");
        T mx = lv.data[0];
        for (T v : lv.data) mx = std::max(mx, v);
        T sum = T(0);
        for (T v : lv.data) sum += std::exp(v - mx);
        const T lse = mx + std::log(sum);
        Node n;
        n.kind = OpKind::SoftmaxCE;
        n.a = logits;
        n.iarg = target;
        n.scalar0 = weight;
        n.val = Tensor<T>::scalar(weight * (lse - lv.data[target]));
        return push(std::move(n));
    }

    // z = mu + exp(0.5 * logvar) ⊙ eps, with eps a recorded constant.
    Id reparam(Id mu, Id logvar, Id eps) {
        const auto& m = val(mu);
        if (!m.same_shape(val(logvar)) || !m.same_shape(val(eps)))
            throw std::runtime_error("reparam: shape mismatch");
        Node n;
        n.kind = OpKind::Reparam;
        n.a = mu;
        n.b = logvar;
        n.c = eps;
        n.val = m;
        const T* lv = val(logvar).data.data();
        const T* ev = val(eps).data.data();
        for (std::size_t i = 0; i < n.val.size(); ++i)
            n.val.data[i] += std::exp(T(0.5) * lv[i]) * ev[i];
        return push(std::move(n));
    }

    // KL(N(mu, diag(exp(logvar))) || N(0, I)) in closed form.
    Id gaussian_kl(Id mu, Id logvar) {
        const auto& m = val(mu);
        if (!m.same_shape(val(logvar))) throw std::runtime_error("gaussian_kl: shape mismatch");
        const T* mv = m.data.data();
        const T* lv = val(logvar).data.data();
        T s = T(0);
        for (std::size_t i = 0; i < m.size(); ++i)
            s += T(1) + lv[i] - mv[i] * mv[i] - std::exp(lv[i]);
        Node n;
        n.kind = OpKind::GaussianKl;
        n.a = mu;
        n.b = logvar;
        n.val = Tensor<T>::scalar(T(-0.5) * s);
        return push(std::move(n));
    }

    const Tensor<T>& value(Id id) const { return nodes_.at(id).val; }
    std::size_t node_count() const { return nodes_.size(); }

    // Reverse sweep from a scalar loss; gradients accumulate (+=) into the
    // parameter store, so repeated calls build up batch gradients.
    void backward(Id loss) {
        if (val(loss).size() != 1) throw std::runtime_error("backward: loss must be a scalar");
        if (!param_ids_.empty() && !store_)
            throw std::runtime_error("backward: graph was built over a read-only store");
        for (auto& n : nodes_) {
            n.grad.assign(n.val.size(), T(0));
        }
        nodes_[loss].grad[0] = T(1);
        for (Id id = loss; id >= 0; --id) {
            Node& n = nodes_[id];
            bool any = false;
            for (T g : n.grad) {
                if (g != T(0)) {
                    any = true;
                    break;
                }
            }
            if (!any) continue;
            backprop(n);
        }
        if (store_) {
            for (const auto& [handle, id] : param_ids_) {
                auto& gsum = store_->entry(handle).grad.data;
                const auto& g = nodes_[id].grad;
                for (std::size_t i = 0; i < gsum.size(); ++i) gsum[i] += g[i];
            }
        }
    }

    // Gradient of a non-parameter node after backward() (for tests).
    std::vector<T> input_grad(Id id) const { return nodes_.at(id).grad; }

private:
    struct Node {
        OpKind kind{};
        Id a = -1, b = -1, c = -1;
        std::vector<Id> list;
        int param = -1;
        int iarg = 0;
        T scalar0 = T(0);
        Tensor<T> val;
        std::vector<T> grad;
    };

    const Tensor<T>& val(Id id) const { return nodes_.at(id).val; }

    Id push(Node n) {
        if (check_finite) {
            for (T v : n.val.data) {
                if (!std::isfinite(static_cast<double>(v)))
                    throw NumericalError("non-finite value produced by graph op");
            }
        }
        nodes_.push_back(std::move(n));
        return static_cast<Id>(nodes_.size()) - 1;
    }

    void backprop(Node& n) {
        switch (n.kind) {
        case OpKind::Input:
        case OpKind::Param:
            break;
        case OpKind::Dense: {
            const auto& xv = val(n.a);
            const auto& wv = val(n.b);
            const int rows = xv.rows(), in = wv.shape[0], out = wv.shape[1];
            T* dx = nodes_[n.a].grad.data();
            T* dw = nodes_[n.b].grad.data();
            T* db = nodes_[n.c].grad.data();
            const T* xd = xv.data.data();
            const T* wd = wv.data.data();
            const T* dy = n.grad.data();
            for (int i = 0; i < rows; ++i) {
                const T* dyi = dy + static_cast<std::size_t>(i) * out;
                const T* xi = xd + static_cast<std::size_t>(i) * in;
                T* dxi = dx + static_cast<std::size_t>(i) * in;
                for (int j = 0; j < out; ++j) db[j] += dyi[j];
                for (int k = 0; k < in; ++k) {
                    const T* wk = wd + static_cast<std::size_t>(k) * out;
                    T acc = T(0);
                    for (int j = 0; j < out; ++j) acc += dyi[j] * wk[j];
                    dxi[k] += acc;
                    T* dwk = dw + static_cast<std::size_t>(k) * out;
                    const T xk = xi[k];
                    for (int j = 0; j < out; ++j) dwk[j] += xk * dyi[j];
                }
            }
            break;
        }
        case OpKind::LeakyRelu: {
            const auto& xv = val(n.a);
            T* dx = nodes_[n.a].grad.data();
            for (std::size_t i = 0; i < xv.size(); ++i)
                dx[i] += (xv.data[i] > T(0) ? T(1) : n.scalar0) * n.grad[i];
            break;
        }
        case OpKind::Tanh: {
            T* dx = nodes_[n.a].grad.data();
            for (std::size_t i = 0; i < n.val.size(); ++i)
                dx[i] += (T(1) - n.val.data[i] * n.val.data[i]) * n.grad[i];
            break;
        }
        case OpKind::Add: {
            T* da = nodes_[n.a].grad.data();
            T* db = nodes_[n.b].grad.data();
            for (std::size_t i = 0; i < n.val.size(); ++i) {
                da[i] += n.grad[i];
                db[i] += n.grad[i];
            }
            break;
        }
        case OpKind::Concat: {
            const int rows = n.val.rows();
            const int ca = val(n.a).cols(), cb = val(n.b).cols();
            T* da = nodes_[n.a].grad.data();
            T* db = nodes_[n.b].grad.data();
            for (int i = 0; i < rows; ++i) {
                const T* g = n.grad.data() + static_cast<std::size_t>(i) * (ca + cb);
                for (int j = 0; j < ca; ++j) da[static_cast<std::size_t>(i) * ca + j] += g[j];
                for (int j = 0; j < cb; ++j) db[static_cast<std::size_t>(i) * cb + j] += g[ca + j];
            }
            break;
        }
        case OpKind::Row: {
            const int c = n.val.cols();
            T* dx = nodes_[n.a].grad.data() + static_cast<std::size_t>(n.iarg) * c;
            for (int j = 0; j < c; ++j) dx[j] += n.grad[j];
            break;
        }
        case OpKind::StackRows: {
            const int c = n.val.cols();
            for (std::size_t i = 0; i < n.list.size(); ++i) {
                T* dr = nodes_[n.list[i]].grad.data();
                const T* g = n.grad.data() + i * c;
                for (int j = 0; j < c; ++j) dr[j] += g[j];
            }
            break;
        }
        case OpKind::Scale: {
            T* dx = nodes_[n.a].grad.data();
            for (std::size_t i = 0; i < n.val.size(); ++i) dx[i] += n.scalar0 * n.grad[i];
            break;
        }
        case OpKind::SquaredL2: {
            const T g = n.grad[0];
            const T* pa = val(n.a).data.data();
            const T* pb = val(n.b).data.data();
            T* da = nodes_[n.a].grad.data();
            T* db = nodes_[n.b].grad.data();
            for (std::size_t i = 0; i < val(n.a).size(); ++i) {
                const T d = T(2) * (pa[i] - pb[i]) * g;
                da[i] += d;
                db[i] -= d;
            }
            break;
        }
        case OpKind::SoftmaxCE: {
            const auto& lv = val(n.a);
            T mx = lv.data[0];
            for (T v : lv.data) mx = std::max(mx, v);
            T sum = T(0);
            for (T v : lv.data) sum += std::exp(v - mx);
            T* dl = nodes_[n.a].grad.data();
            const T g = n.grad[0] * n.scalar0;
            for (int j = 0; j < lv.cols(); ++j) {
                const T p = std::exp(lv.data[j] - mx) / sum;
                dl[j] += g * (p - (j == n.iarg ? T(1) : T(0)));
            }
            break;
        }
        case OpKind::Reparam: {
            const T* lv = val(n.b).data.data();
            const T* ev = val(n.c).data.data();
            T* dmu = nodes_[n.a].grad.data();
            T* dlv = nodes_[n.b].grad.data();
            for (std::size_t i = 0; i < n.val.size(); ++i) {
                dmu[i] += n.grad[i];
                dlv[i] += n.grad[i] * T(0.5) * std::exp(T(0.5) * lv[i]) * ev[i];
            }
            break;
        }
        case OpKind::GaussianKl: {
            const T g = n.grad[0];
            const T* mv = val(n.a).data.data();
            const T* lv = val(n.b).data.data();
            T* dmu = nodes_[n.a].grad.data();
            T* dlv = nodes_[n.b].grad.data();
            for (std::size_t i = 0; i < val(n.a).size(); ++i) {
                dmu[i] += g * mv[i];
                dlv[i] += g * T(0.5) * (std::exp(lv[i]) - T(1));
            }
            break;
        }
        }
    }

    std::vector<Node> nodes_;
    const ParamStore<T>* cstore_;
    ParamStore<T>* store_;
    std::map<int, Id> param_ids_;
};

} // namespace vesselgen
