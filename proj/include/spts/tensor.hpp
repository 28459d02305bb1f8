#pragma once

#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "spts/rng.hpp"

namespace spts::ad {

template <class S>
struct NodeT;

template <class S>
using NodePtr = std::shared_ptr<NodeT<S>>;

// Per-backward gradient storage. Gradients live here (not on the nodes)
// while a reverse pass runs, so concurrent backward passes over graphs that
// share leaf tensors never write to shared state.
template <class S>
class GradTableT {
public:
    std::vector<S>& buf(const NodeT<S>* n) {
        auto it = grads_.find(n);
        if (it == grads_.end())
            it = grads_.emplace(n, std::vector<S>(n->value.size(), S(0))).first;
        return it->second;
    }
    std::vector<S>* find(const NodeT<S>* n) {
        auto it = grads_.find(n);
        return it == grads_.end() ? nullptr : &it->second;
    }
    void release(const NodeT<S>* n) { grads_.erase(n); }
    std::vector<S> take(const NodeT<S>* n) {
        auto it = grads_.find(n);
        if (it == grads_.end()) return std::vector<S>(n->value.size(), S(0));
        std::vector<S> out = std::move(it->second);
        grads_.erase(it);
        return out;
    }

private:
    std::unordered_map<const NodeT<S>*, std::vector<S>> grads_;
};

template <class S>
struct NodeT {
    std::vector<int> shape;
    std::vector<S> value;
    std::vector<S> grad;  // populated for requires-grad leaves after backward()
    bool requires_grad = false;
    bool consumed = false;  // set once backward has run through this op
    std::vector<NodePtr<S>> parents;
    // Distributes the node's output gradient (grads.buf(this)) to its parents.
    std::function<void(const NodeT<S>&, const std::vector<S>&, GradTableT<S>&)> backprop;

    size_t numel() const { return value.size(); }
};

inline std::string shape_str(const std::vector<int>& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
}

inline size_t shape_numel(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) {
        if (d < 0) throw std::invalid_argument("negative dimension in shape " + shape_str(s));
        n *= static_cast<size_t>(d);
    }
    return n;
}

// Value-semantic handle to a graph node. Copies share the node.
template <class S>
class TensorT {
public:
    TensorT() = default;
    explicit TensorT(NodePtr<S> n) : n_(std::move(n)) {}

    static TensorT zeros(std::vector<int> shape) {
        auto n = std::make_shared<NodeT<S>>();
        n->value.assign(shape_numel(shape), S(0));
        n->shape = std::move(shape);
        return TensorT(n);
    }
    static TensorT full(std::vector<int> shape, S v) {
        TensorT t = zeros(std::move(shape));
        std::fill(t.data().begin(), t.data().end(), v);
        return t;
    }
    static TensorT from(std::vector<int> shape, std::vector<S> data) {
        if (shape_numel(shape) != data.size())
            throw std::invalid_argument("data size does not match shape " + shape_str(shape));
        auto n = std::make_shared<NodeT<S>>();
        n->shape = std::move(shape);
        n->value = std::move(data);
        return TensorT(n);
    }
    static TensorT scalar(S v) { return from({}, {v}); }
    static TensorT randn(std::vector<int> shape, Rng& rng, S stddev = S(1)) {
        TensorT t = zeros(std::move(shape));
        for (auto& v : t.data()) v = static_cast<S>(rng.normal()) * stddev;
        return t;
    }

    bool defined() const { return n_ != nullptr; }
    NodeT<S>* node() const { return n_.get(); }
    const NodePtr<S>& node_ptr() const { return n_; }

    const std::vector<int>& shape() const { return n_->shape; }
    int rank() const { return static_cast<int>(n_->shape.size()); }
    int dim(int i) const { return n_->shape[static_cast<size_t>(i)]; }
    size_t numel() const { return n_->value.size(); }

    const std::vector<S>& data() const { return n_->value; }
    std::vector<S>& data() { return n_->value; }

    S item() const {
        if (numel() != 1)
            throw std::invalid_argument("item() on non-scalar tensor " + shape_str(shape()));
        return n_->value[0];
    }

    TensorT& set_requires_grad(bool b = true) {
        n_->requires_grad = b;
        return *this;
    }
    bool requires_grad() const { return n_->requires_grad; }
    bool is_leaf() const { return n_->parents.empty(); }

    bool has_grad() const { return !n_->grad.empty(); }
    const std::vector<S>& grad() const {
        if (n_->grad.empty())
            throw std::logic_error("tensor has no gradient; run backward first");
        return n_->grad;
    }
    void zero_grad() { n_->grad.clear(); }

private:
    NodePtr<S> n_;
};

// Reverse pass driver over the graph reachable from a root. Nodes are held
// in topological order (parents before users); execution walks it backwards
// exactly once, then marks the recorded ops consumed.
template <class S>
class TapeT {
public:
    static TapeT record(const TensorT<S>& root) {
        TapeT t;
        if (root.node()->consumed)
            throw std::logic_error("backward already ran for this graph");
        t.collect(root.node_ptr());
        return t;
    }

    const std::vector<NodePtr<S>>& order() const { return order_; }

    // Runs the reverse pass seeded with d(root)/d(root)=1 and returns the
    // gradient table still holding the leaf gradients.
    GradTableT<S> run(const TensorT<S>& root) {
        GradTableT<S> table;
        table.buf(root.node()).assign(root.numel(), S(1));
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            NodeT<S>* n = it->get();
            if (!n->backprop) continue;
            auto* g = table.find(n);
            if (g) n->backprop(*n, *g, table);
            table.release(n);
            n->backprop = nullptr;
            n->parents.clear();
            n->consumed = true;
        }
        return table;
    }

private:
    void collect(const NodePtr<S>& n) {
        if (!n->requires_grad || seen_.count(n.get())) return;
        seen_.emplace(n.get(), 1);
        for (const auto& p : n->parents) collect(p);
        order_.push_back(n);
    }

    std::vector<NodePtr<S>> order_;
    std::unordered_map<const NodeT<S>*, char> seen_;
};

// Populates n.grad (accumulating) for every requires-grad leaf reachable
// from `loss`. The recorded graph is consumed; a second call throws.
template <class S>
void backward(const TensorT<S>& loss) {
    if (loss.numel() != 1)
        throw std::invalid_argument("backward requires a scalar loss, got " +
                                    shape_str(loss.shape()));
    auto tape = TapeT<S>::record(loss);
    auto table = tape.run(loss);
    for (const auto& n : tape.order()) {
        if (n->consumed || !n->requires_grad) continue;  // ops were consumed by run()
        auto g = table.take(n.get());
        if (n->grad.empty())
            n->grad = std::move(g);
        else
            for (size_t i = 0; i < g.size(); ++i) n->grad[i] += g[i];
    }
}

// Same reverse pass, but gradients are returned per requested leaf instead
// of being written into the nodes. Safe to call concurrently from several
// workers whose graphs share the same leaf tensors.
template <class S>
std::vector<std::vector<S>> backward_grads(const TensorT<S>& loss,
                                           const std::vector<TensorT<S>>& leaves) {
    if (loss.numel() != 1)
        throw std::invalid_argument("backward requires a scalar loss, got " +
                                    shape_str(loss.shape()));
    auto tape = TapeT<S>::record(loss);
    auto table = tape.run(loss);
    std::vector<std::vector<S>> out;
    out.reserve(leaves.size());
    for (const auto& l : leaves) out.push_back(table.take(l.node()));
    return out;
}

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

}  // namespace spts::ad
