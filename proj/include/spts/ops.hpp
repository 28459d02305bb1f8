#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "spts/kernels.hpp"
#include "spts/tensor.hpp"

// Autodiff primitives. Forward math runs through spts::kernels; each op
// registers a closure that pulls the output gradient into its parents'
// buffers in the gradient table.

namespace spts::ad {

namespace detail {

enum class Broadcast { same, scalar, suffix };

template <class S>
Broadcast broadcast_kind(const TensorT<S>& a, const TensorT<S>& b, const char* op) {
    if (a.shape() == b.shape()) return Broadcast::same;
    if (b.numel() == 1) return Broadcast::scalar;
    const auto& as = a.shape();
    const auto& bs = b.shape();
    if (bs.size() < as.size() &&
        std::equal(bs.begin(), bs.end(), as.end() - static_cast<long>(bs.size())))
        return Broadcast::suffix;
    throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                                shape_str(as) + " and " + shape_str(bs));
}

template <class S, class F>
TensorT<S> make_op(std::vector<int> shape, std::vector<S> value,
                   std::vector<NodePtr<S>> parents, F&& backprop) {
    auto n = std::make_shared<NodeT<S>>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    bool rg = false;
    for (const auto& p : parents) rg = rg || p->requires_grad;
    n->requires_grad = rg;
    if (rg) {
        n->parents = std::move(parents);
        n->backprop = std::forward<F>(backprop);
    }
    return TensorT<S>(n);
}

inline size_t prod(const std::vector<int>& s, size_t lo, size_t hi) {
    size_t p = 1;
    for (size_t i = lo; i < hi; ++i) p *= static_cast<size_t>(s[i]);
    return p;
}

}  // namespace detail

template <class S>
TensorT<S> add(const TensorT<S>& a, const TensorT<S>& b) {
    const auto kind = detail::broadcast_kind(a, b, "add");
    const size_t n = a.numel(), bn = b.numel();
    std::vector<S> out(n);
    const auto& av = a.data();
    const auto& bv = b.data();
    switch (kind) {
        case detail::Broadcast::same:
            for (size_t i = 0; i < n; ++i) out[i] = av[i] + bv[i];
            break;
        case detail::Broadcast::scalar:
            for (size_t i = 0; i < n; ++i) out[i] = av[i] + bv[0];
            break;
        case detail::Broadcast::suffix:
            for (size_t i = 0; i < n; ++i) out[i] = av[i] + bv[i % bn];
            break;
    }
    auto an = a.node_ptr(), bnp = b.node_ptr();
    return detail::make_op<S>(
        a.shape(), std::move(out), {an, bnp},
        [an, bnp, kind, bn](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
            if (an->requires_grad) {
                auto& ga = t.buf(an.get());
                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (bnp->requires_grad) {
                auto& gb = t.buf(bnp.get());
                if (kind == detail::Broadcast::same)
                    for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                else if (kind == detail::Broadcast::scalar)
                    for (size_t i = 0; i < g.size(); ++i) gb[0] += g[i];
                else
                    for (size_t i = 0; i < g.size(); ++i) gb[i % bn] += g[i];
            }
        });
}

template <class S>
TensorT<S> mul(const TensorT<S>& a, const TensorT<S>& b) {
    const auto kind = detail::broadcast_kind(a, b, "mul");
    const size_t n = a.numel(), bn = b.numel();
    std::vector<S> out(n);
    const auto& av = a.data();
    const auto& bv = b.data();
    switch (kind) {
        case detail::Broadcast::same:
            for (size_t i = 0; i < n; ++i) out[i] = av[i] * bv[i];
            break;
        case detail::Broadcast::scalar:
            for (size_t i = 0; i < n; ++i) out[i] = av[i] * bv[0];
            break;
        case detail::Broadcast::suffix:
            for (size_t i = 0; i < n; ++i) out[i] = av[i] * bv[i % bn];
            break;
    }
    auto an = a.node_ptr(), bnp = b.node_ptr();
    return detail::make_op<S>(
        a.shape(), std::move(out), {an, bnp},
        [an, bnp, kind, bn](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
            const auto& av = an->value;
            const auto& bv = bnp->value;
            if (an->requires_grad) {
                auto& ga = t.buf(an.get());
                if (kind == detail::Broadcast::same)
                    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
                else if (kind == detail::Broadcast::scalar)
                    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[0];
                else
                    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i % bn];
            }
            if (bnp->requires_grad) {
                auto& gb = t.buf(bnp.get());
                if (kind == detail::Broadcast::same)
                    for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
                else if (kind == detail::Broadcast::scalar)
                    for (size_t i = 0; i < g.size(); ++i) gb[0] += g[i] * av[i];
                else
                    for (size_t i = 0; i < g.size(); ++i) gb[i % bn] += g[i] * av[i];
            }
        });
}

template <class S>
TensorT<S> scale(const TensorT<S>& a, S c) {
    std::vector<S> out(a.numel());
    const auto& av = a.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * c;
    auto an = a.node_ptr();
    return detail::make_op<S>(a.shape(), std::move(out), {an},
                              [an, c](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
                                  auto& ga = t.buf(an.get());
                                  for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
                              });
}

template <class S>
TensorT<S> sum(const TensorT<S>& a) {
    S s = S(0);
    for (S v : a.data()) s += v;
    auto an = a.node_ptr();
    return detail::make_op<S>({}, {s}, {an},
                              [an](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
                                  auto& ga = t.buf(an.get());
                                  for (auto& v : ga) v += g[0];
                              });
}

template <class S>
TensorT<S> relu(const TensorT<S>& a) {
    std::vector<S> out(a.numel());
    const auto& av = a.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] > S(0) ? av[i] : S(0);
    auto an = a.node_ptr();
    return detail::make_op<S>(a.shape(), std::move(out), {an},
                              [an](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
                                  auto& ga = t.buf(an.get());
                                  const auto& av = an->value;
                                  for (size_t i = 0; i < g.size(); ++i)
                                      if (av[i] > S(0)) ga[i] += g[i];
                              });
}

template <class S>
TensorT<S> gelu(const TensorT<S>& a) {
    std::vector<S> out(a.numel());
    const auto& av = a.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] = kernels::gelu_scalar(av[i]);
    auto an = a.node_ptr();
    return detail::make_op<S>(
        a.shape(), std::move(out), {an},
        [an](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
            auto& ga = t.buf(an.get());
            const auto& av = an->value;
            for (size_t i = 0; i < g.size(); ++i)
                ga[i] += g[i] * kernels::gelu_grad_scalar(av[i]);
        });
}

// a[m x k] @ b[k x n] -> [m x n]
template <class S>
TensorT<S> matmul(const TensorT<S>& a, const TensorT<S>& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a.shape()) +
                                    " and " + shape_str(b.shape()));
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<S> out(static_cast<size_t>(m) * n);
    kernels::matmul(a.data().data(), b.data().data(), out.data(), m, k, n);
    auto an = a.node_ptr(), bnp = b.node_ptr();
    return detail::make_op<S>(
        {m, n}, std::move(out), {an, bnp},
        [an, bnp, m, k, n](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
            if (an->requires_grad)
                kernels::matmul_nt_acc(g.data(), bnp->value.data(), t.buf(an.get()).data(),
                                       m, n, k);
            if (bnp->requires_grad)
                kernels::matmul_tn_acc(an->value.data(), g.data(), t.buf(bnp.get()).data(),
                                       m, k, n);
        });
}

// x[m x k] @ w[k x n] + b[n], bias added in place of the product buffer.
template <class S>
TensorT<S> linear(const TensorT<S>& x, const TensorT<S>& w, const TensorT<S>& b) {
    if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0))
        throw std::invalid_argument("linear: incompatible shapes " + shape_str(x.shape()) +
                                    " and " + shape_str(w.shape()));
    const int m = x.dim(0), k = x.dim(1), n = w.dim(1);
    if (b.numel() != static_cast<size_t>(n))
        throw std::invalid_argument("linear: bias must have " + std::to_string(n) +
                                    " elements");
    std::vector<S> out(static_cast<size_t>(m) * n);
    kernels::matmul(x.data().data(), w.data().data(), out.data(), m, k, n);
    const S* bv = b.data().data();
    for (int i = 0; i < m; ++i) {
        S* row = out.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) row[j] += bv[j];
    }
    auto xn = x.node_ptr(), wn = w.node_ptr(), bn = b.node_ptr();
    return detail::make_op<S>(
        {m, n}, std::move(out), {xn, wn, bn},
        [xn, wn, bn, m, k, n](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
            if (xn->requires_grad)
                kernels::matmul_nt_acc(g.data(), wn->value.data(), t.buf(xn.get()).data(), m,
                                       n, k);
            if (wn->requires_grad)
                kernels::matmul_tn_acc(xn->value.data(), g.data(), t.buf(wn.get()).data(), m,
                                       k, n);
            if (bn->requires_grad) {
                auto& db = t.buf(bn.get());
                for (int i = 0; i < m; ++i) {
                    const S* row = g.data() + static_cast<size_t>(i) * n;
                    for (int j = 0; j < n; ++j) db[static_cast<size_t>(j)] += row[j];
                }
            }
        });
}

// Batched matmul: a[B x m x k] @ b[B x k x n] -> [B x m x n]
template <class S>
TensorT<S> bmm(const TensorT<S>& a, const TensorT<S>& b) {
    if (a.rank() != 3 || b.rank() != 3 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(1))
        throw std::invalid_argument("bmm: incompatible shapes " + shape_str(a.shape()) +
                                    " and " + shape_str(b.shape()));
    const int B = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
    const size_t sa = static_cast<size_t>(m) * k, sb = static_cast<size_t>(k) * n,
                 so = static_cast<size_t>(m) * n;
    std::vector<S> out(static_cast<size_t>(B) * so);
    for (int i = 0; i < B; ++i)
        kernels::matmul(a.data().data() + i * sa, b.data().data() + i * sb,
                        out.data() + i * so, m, k, n);
    auto an = a.node_ptr(), bnp = b.node_ptr();
    return detail::make_op<S>(
        {B, m, n}, std::move(out), {an, bnp},
        [an, bnp, B, m, k, n, sa, sb, so](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
            if (an->requires_grad) {
                auto& ga = t.buf(an.get());
                for (int i = 0; i < B; ++i)
                    kernels::matmul_nt_acc(g.data() + i * so, bnp->value.data() + i * sb,
                                           ga.data() + i * sa, m, n, k);
            }
            if (bnp->requires_grad) {
                auto& gb = t.buf(bnp.get());
                for (int i = 0; i < B; ++i)
                    kernels::matmul_tn_acc(an->value.data() + i * sa, g.data() + i * so,
                                           gb.data() + i * sb, m, k, n);
            }
        });
}

// Softmax along `axis`; each slice sums to 1.
template <class S>
TensorT<S> softmax(const TensorT<S>& a, int axis) {
    if (axis < 0) axis += a.rank();
    if (axis < 0 || axis >= a.rank())
        throw std::invalid_argument("softmax: axis out of range for " + shape_str(a.shape()));
    const auto& sh = a.shape();
    const size_t outer = detail::prod(sh, 0, static_cast<size_t>(axis));
    const size_t an_sz = static_cast<size_t>(sh[static_cast<size_t>(axis)]);
    const size_t inner = detail::prod(sh, static_cast<size_t>(axis) + 1, sh.size());
    std::vector<S> out = a.data();
    if (inner == 1) {
        for (size_t o = 0; o < outer; ++o)
            kernels::softmax_row(out.data() + o * an_sz, static_cast<int>(an_sz));
    } else {
        std::vector<S> slice(an_sz);
        for (size_t o = 0; o < outer; ++o)
            for (size_t i = 0; i < inner; ++i) {
                const size_t base = o * an_sz * inner + i;
                for (size_t j = 0; j < an_sz; ++j) slice[j] = out[base + j * inner];
                kernels::softmax_row(slice.data(), static_cast<int>(an_sz));
                for (size_t j = 0; j < an_sz; ++j) out[base + j * inner] = slice[j];
            }
    }
    auto an = a.node_ptr();
    return detail::make_op<S>(
        a.shape(), std::move(out), {an},
        [an, outer, an_sz, inner](const NodeT<S>& self, const std::vector<S>& g,
                                  GradTableT<S>& t) {
            if (!an->requires_grad) return;
            auto& gx = t.buf(an.get());
            const auto& y = self.value;
            // dx = y * (g - sum(g*y)) per slice
            for (size_t o = 0; o < outer; ++o)
                for (size_t i = 0; i < inner; ++i) {
                    const size_t base = o * an_sz * inner + i;
                    S dot = S(0);
                    for (size_t j = 0; j < an_sz; ++j) {
                        const size_t k = base + j * inner;
                        dot += g[k] * y[k];
                    }
                    for (size_t j = 0; j < an_sz; ++j) {
                        const size_t k = base + j * inner;
                        gx[k] += y[k] * (g[k] - dot);
                    }
                }
        });
}

template <class S>
TensorT<S> layer_norm(const TensorT<S>& x, const TensorT<S>& gain, const TensorT<S>& bias,
                      S eps) {
    if (x.rank() < 1) throw std::invalid_argument("layer_norm: rank-0 input");
    const int n = x.shape().back();
    if (gain.numel() != static_cast<size_t>(n) || bias.numel() != static_cast<size_t>(n))
        throw std::invalid_argument("layer_norm: gain/bias must have " + std::to_string(n) +
                                    " elements");
    const size_t rows = x.numel() / static_cast<size_t>(n);
    std::vector<S> out(x.numel());
    std::vector<S> mean(rows), inv_std(rows);
    for (size_t r = 0; r < rows; ++r)
        kernels::layer_norm_row(x.data().data() + r * n, gain.data().data(),
                                bias.data().data(), eps, out.data() + r * n, n, &mean[r],
                                &inv_std[r]);
    auto xn = x.node_ptr(), gn = gain.node_ptr(), bn = bias.node_ptr();
    return detail::make_op<S>(
        x.shape(), std::move(out), {xn, gn, bn},
        [xn, gn, bn, n, rows, mean = std::move(mean),
         inv_std = std::move(inv_std)](const NodeT<S>&, const std::vector<S>& g,
                                        GradTableT<S>& t) {
            const auto& xv = xn->value;
            const auto& gv = gn->value;
            std::vector<S> xhat(static_cast<size_t>(n));
            for (size_t r = 0; r < rows; ++r) {
                const S* xr = xv.data() + r * n;
                const S* gr = g.data() + r * n;
                S mg = S(0), mgx = S(0);
                for (int i = 0; i < n; ++i) {
                    xhat[static_cast<size_t>(i)] = (xr[i] - mean[r]) * inv_std[r];
                    const S gh = gr[i] * gv[static_cast<size_t>(i)];
                    mg += gh;
                    mgx += gh * xhat[static_cast<size_t>(i)];
                }
                mg /= static_cast<S>(n);
                mgx /= static_cast<S>(n);
                if (xn->requires_grad) {
                    S* dx = t.buf(xn.get()).data() + r * n;
                    for (int i = 0; i < n; ++i) {
                        const S gh = gr[i] * gv[static_cast<size_t>(i)];
                        dx[i] += inv_std[r] * (gh - mg - xhat[static_cast<size_t>(i)] * mgx);
                    }
                }
                if (gn->requires_grad) {
                    S* dg = t.buf(gn.get()).data();
                    for (int i = 0; i < n; ++i)
                        dg[i] += gr[i] * xhat[static_cast<size_t>(i)];
                }
                if (bn->requires_grad) {
                    S* db = t.buf(bn.get()).data();
                    for (int i = 0; i < n; ++i) db[i] += gr[i];
                }
            }
        });
}

// Negated weighted log-likelihood over rows of logits:
//   loss = sum_i w_i * (-log softmax(logits_i)[target_i]) / sum_i w_i
template <class S>
TensorT<S> cross_entropy(const TensorT<S>& logits, const std::vector<int>& targets,
                         const std::vector<S>& weights = {}) {
    if (logits.rank() != 2)
        throw std::invalid_argument("cross_entropy: logits must be rank 2, got " +
                                    shape_str(logits.shape()));
    const int L = logits.dim(0), V = logits.dim(1);
    if (static_cast<int>(targets.size()) != L)
        throw std::invalid_argument("cross_entropy: " + std::to_string(targets.size()) +
                                    " targets for " + std::to_string(L) + " rows");
    if (!weights.empty() && static_cast<int>(weights.size()) != L)
        throw std::invalid_argument("cross_entropy: weight count mismatch");
    for (int r = 0; r < L; ++r)
        if (targets[static_cast<size_t>(r)] < 0 || targets[static_cast<size_t>(r)] >= V)
            throw std::out_of_range("cross_entropy: target id " +
                                    std::to_string(targets[static_cast<size_t>(r)]) +
                                    " outside [0, " + std::to_string(V) + ")");
    S wsum = S(0);
    for (int r = 0; r < L; ++r) {
        const S w = weights.empty() ? S(1) : weights[static_cast<size_t>(r)];
        if (w < S(0)) throw std::invalid_argument("cross_entropy: negative weight");
        wsum += w;
    }
    if (wsum <= S(0)) throw std::invalid_argument("cross_entropy: weights sum to zero");

    std::vector<S> probs(logits.numel());
    S total = S(0);
    for (int r = 0; r < L; ++r) {
        const S* row = logits.data().data() + static_cast<size_t>(r) * V;
        S* p = probs.data() + static_cast<size_t>(r) * V;
        S mx = row[0];
        for (int j = 1; j < V; ++j) mx = std::max(mx, row[j]);
        S se = S(0);
        for (int j = 0; j < V; ++j) {
            p[j] = std::exp(row[j] - mx);
            se += p[j];
        }
        const S inv = S(1) / se;
        for (int j = 0; j < V; ++j) p[j] *= inv;
        const S w = weights.empty() ? S(1) : weights[static_cast<size_t>(r)];
        total += w * (std::log(se) + mx - row[targets[static_cast<size_t>(r)]]);
    }
    total /= wsum;
    auto ln = logits.node_ptr();
    return detail::make_op<S>(
        {}, {total}, {ln},
        [ln, L, V, targets, weights, wsum,
         probs = std::move(probs)](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
            auto& gl = t.buf(ln.get());
            for (int r = 0; r < L; ++r) {
                const S w = weights.empty() ? S(1) : weights[static_cast<size_t>(r)];
                const S c = g[0] * w / wsum;
                const S* p = probs.data() + static_cast<size_t>(r) * V;
                S* d = gl.data() + static_cast<size_t>(r) * V;
                for (int j = 0; j < V; ++j) d[j] += c * p[j];
                d[targets[static_cast<size_t>(r)]] -= c;
            }
        });
}

// table[V x D] rows gathered by id -> [len(ids) x D]
template <class S>
TensorT<S> embedding_lookup(const TensorT<S>& table, const std::vector<int>& ids) {
    if (table.rank() != 2)
        throw std::invalid_argument("embedding_lookup: table must be rank 2");
    const int V = table.dim(0), D = table.dim(1);
    for (int id : ids)
        if (id < 0 || id >= V)
            throw std::out_of_range("embedding_lookup: id " + std::to_string(id) +
                                    " outside [0, " + std::to_string(V) + ")");
    const int L = static_cast<int>(ids.size());
    std::vector<S> out(static_cast<size_t>(L) * D);
    for (int r = 0; r < L; ++r)
        std::copy_n(table.data().data() + static_cast<size_t>(ids[static_cast<size_t>(r)]) * D,
                    D, out.data() + static_cast<size_t>(r) * D);
    auto tn = table.node_ptr();
    return detail::make_op<S>(
        {L, D}, std::move(out), {tn},
        [tn, ids, D](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
            auto& gt = t.buf(tn.get());
            for (size_t r = 0; r < ids.size(); ++r) {
                S* dst = gt.data() + static_cast<size_t>(ids[r]) * D;
                const S* src = g.data() + r * D;
                for (int j = 0; j < D; ++j) dst[j] += src[j];
            }
        });
}

// x[Ci x H x W] * w[Co x Ci x kh x kw] + b[Co] -> [Co x Ho x Wo], via im2col.
template <class S>
TensorT<S> conv2d(const TensorT<S>& x, const TensorT<S>& w, const TensorT<S>& b,
                  int stride, int pad) {
    if (x.rank() != 3 || w.rank() != 4 || x.dim(0) != w.dim(1))
        throw std::invalid_argument("conv2d: incompatible shapes " + shape_str(x.shape()) +
                                    " and " + shape_str(w.shape()));
    const int Ci = x.dim(0), H = x.dim(1), W = x.dim(2);
    const int Co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    if (b.numel() != static_cast<size_t>(Co))
        throw std::invalid_argument("conv2d: bias must have Co elements");
    const int Ho = (H + 2 * pad - kh) / stride + 1;
    const int Wo = (W + 2 * pad - kw) / stride + 1;
    if (Ho <= 0 || Wo <= 0) throw std::invalid_argument("conv2d: empty output");

    const int K = Ci * kh * kw, P = Ho * Wo;
    std::vector<S> col(static_cast<size_t>(K) * P, S(0));
    const S* xd = x.data().data();
    for (int ci = 0; ci < Ci; ++ci)
        for (int u = 0; u < kh; ++u)
            for (int v = 0; v < kw; ++v) {
                S* crow = col.data() + static_cast<size_t>((ci * kh + u) * kw + v) * P;
                for (int oy = 0; oy < Ho; ++oy) {
                    const int iy = oy * stride + u - pad;
                    if (iy < 0 || iy >= H) continue;
                    const S* xrow = xd + (static_cast<size_t>(ci) * H + iy) * W;
                    for (int ox = 0; ox < Wo; ++ox) {
                        const int ix = ox * stride + v - pad;
                        if (ix >= 0 && ix < W) crow[oy * Wo + ox] = xrow[ix];
                    }
                }
            }
    std::vector<S> out(static_cast<size_t>(Co) * P);
    kernels::matmul(w.data().data(), col.data(), out.data(), Co, K, P);
    for (int o = 0; o < Co; ++o) {
        const S bo = b.data()[static_cast<size_t>(o)];
        S* row = out.data() + static_cast<size_t>(o) * P;
        for (int j = 0; j < P; ++j) row[j] += bo;
    }
    auto xn = x.node_ptr(), wn = w.node_ptr(), bn2 = b.node_ptr();
    return detail::make_op<S>(
        {Co, Ho, Wo}, std::move(out), {xn, wn, bn2},
        [xn, wn, bn2, Ci, H, W, Co, kh, kw, Ho, Wo, stride, pad, K, P,
         col = std::move(col)](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
            if (bn2->requires_grad) {
                auto& db = t.buf(bn2.get());
                for (int o = 0; o < Co; ++o) {
                    S acc = S(0);
                    const S* row = g.data() + static_cast<size_t>(o) * P;
                    for (int j = 0; j < P; ++j) acc += row[j];
                    db[static_cast<size_t>(o)] += acc;
                }
            }
            if (wn->requires_grad)
                kernels::matmul_nt_acc(g.data(), col.data(), t.buf(wn.get()).data(), Co, P,
                                       K);
            if (xn->requires_grad) {
                std::vector<S> dcol(static_cast<size_t>(K) * P, S(0));
                kernels::matmul_tn_acc(wn->value.data(), g.data(), dcol.data(), Co, K, P);
                auto& dx = t.buf(xn.get());
                for (int ci = 0; ci < Ci; ++ci)
                    for (int u = 0; u < kh; ++u)
                        for (int v = 0; v < kw; ++v) {
                            const S* crow =
                                dcol.data() + static_cast<size_t>((ci * kh + u) * kw + v) * P;
                            for (int oy = 0; oy < Ho; ++oy) {
                                const int iy = oy * stride + u - pad;
                                if (iy < 0 || iy >= H) continue;
                                S* xrow = dx.data() + (static_cast<size_t>(ci) * H + iy) * W;
                                for (int ox = 0; ox < Wo; ++ox) {
                                    const int ix = ox * stride + v - pad;
                                    if (ix >= 0 && ix < W) xrow[ix] += crow[oy * Wo + ox];
                                }
                            }
                        }
            }
        });
}

template <class S>
TensorT<S> reshape(const TensorT<S>& x, std::vector<int> shape) {
    if (shape_numel(shape) != x.numel())
        throw std::invalid_argument("reshape: cannot view " + shape_str(x.shape()) + " as " +
                                    shape_str(shape));
    auto xn = x.node_ptr();
    std::vector<S> out = x.data();
    return detail::make_op<S>(std::move(shape), std::move(out), {xn},
                              [xn](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
                                  auto& gx = t.buf(xn.get());
                                  for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                              });
}

namespace detail {
inline std::vector<size_t> row_major_strides(const std::vector<int>& shape) {
    std::vector<size_t> st(shape.size(), 1);
    for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i)
        st[static_cast<size_t>(i)] =
            st[static_cast<size_t>(i) + 1] * static_cast<size_t>(shape[static_cast<size_t>(i) + 1]);
    return st;
}
}  // namespace detail

// Permutes axes: out[idx[perm[0]], ..] = in[idx[0], ..].
template <class S>
TensorT<S> transpose(const TensorT<S>& x, const std::vector<int>& perm) {
    const int r = x.rank();
    if (static_cast<int>(perm.size()) != r)
        throw std::invalid_argument("transpose: perm rank mismatch");
    std::vector<char> used(static_cast<size_t>(r), 0);
    for (int p : perm) {
        if (p < 0 || p >= r || used[static_cast<size_t>(p)])
            throw std::invalid_argument("transpose: invalid permutation");
        used[static_cast<size_t>(p)] = 1;
    }
    std::vector<int> oshape(static_cast<size_t>(r));
    for (int i = 0; i < r; ++i) oshape[static_cast<size_t>(i)] = x.dim(perm[static_cast<size_t>(i)]);
    const auto ist = detail::row_major_strides(x.shape());
    const auto ost = detail::row_major_strides(oshape);
    // stride of output axis i in input index space
    std::vector<size_t> map(static_cast<size_t>(r));
    for (int i = 0; i < r; ++i) map[static_cast<size_t>(i)] = ist[static_cast<size_t>(perm[static_cast<size_t>(i)])];
    const size_t n = x.numel();
    std::vector<S> out(n);
    const auto& xv = x.data();
    std::vector<size_t> idx(static_cast<size_t>(r), 0);
    for (size_t o = 0; o < n; ++o) {
        size_t src = 0;
        size_t rem = o;
        for (int i = 0; i < r; ++i) {
            const size_t q = rem / ost[static_cast<size_t>(i)];
            rem %= ost[static_cast<size_t>(i)];
            src += q * map[static_cast<size_t>(i)];
        }
        out[o] = xv[src];
    }
    auto xn = x.node_ptr();
    return detail::make_op<S>(
        std::move(oshape), std::move(out), {xn},
        [xn, ost, map, r, n](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
            auto& gx = t.buf(xn.get());
            for (size_t o = 0; o < n; ++o) {
                size_t src = 0;
                size_t rem = o;
                for (int i = 0; i < r; ++i) {
                    const size_t q = rem / ost[static_cast<size_t>(i)];
                    rem %= ost[static_cast<size_t>(i)];
                    src += q * map[static_cast<size_t>(i)];
                }
                gx[src] += g[o];
            }
        });
}

template <class S>
TensorT<S> concat(const std::vector<TensorT<S>>& xs, int axis) {
    if (xs.empty()) throw std::invalid_argument("concat: no inputs");
    const int r = xs[0].rank();
    if (axis < 0) axis += r;
    if (axis < 0 || axis >= r) throw std::invalid_argument("concat: axis out of range");
    std::vector<int> oshape = xs[0].shape();
    int axis_total = 0;
    for (const auto& x : xs) {
        if (x.rank() != r) throw std::invalid_argument("concat: rank mismatch");
        for (int i = 0; i < r; ++i)
            if (i != axis && x.dim(i) != oshape[static_cast<size_t>(i)])
                throw std::invalid_argument("concat: shape mismatch " +
                                            shape_str(x.shape()) + " vs " + shape_str(oshape));
        axis_total += x.dim(axis);
    }
    oshape[static_cast<size_t>(axis)] = axis_total;
    const size_t outer = detail::prod(oshape, 0, static_cast<size_t>(axis));
    const size_t inner = detail::prod(oshape, static_cast<size_t>(axis) + 1, oshape.size());
    std::vector<S> out(shape_numel(oshape));
    std::vector<size_t> blocks;  // per-input axis length * inner
    size_t off = 0;
    for (const auto& x : xs) {
        const size_t blk = static_cast<size_t>(x.dim(axis)) * inner;
        for (size_t o = 0; o < outer; ++o)
            std::copy_n(x.data().data() + o * blk, blk,
                        out.data() + o * static_cast<size_t>(axis_total) * inner + off);
        blocks.push_back(blk);
        off += blk;
    }
    std::vector<NodePtr<S>> parents;
    for (const auto& x : xs) parents.push_back(x.node_ptr());
    const size_t row = static_cast<size_t>(axis_total) * inner;
    return detail::make_op<S>(
        std::move(oshape), std::move(out), std::move(parents),
        [blocks, outer, row](const NodeT<S>& self, const std::vector<S>& g, GradTableT<S>& t) {
            size_t off = 0;
            for (size_t p = 0; p < self.parents.size(); ++p) {
                const auto& par = self.parents[p];
                if (par->requires_grad) {
                    auto& gp = t.buf(par.get());
                    for (size_t o = 0; o < outer; ++o) {
                        const S* src = g.data() + o * row + off;
                        S* dst = gp.data() + o * blocks[p];
                        for (size_t i = 0; i < blocks[p]; ++i) dst[i] += src[i];
                    }
                }
                off += blocks[p];
            }
        });
}

// out[i] = mask[i] ? value : x[i]; gradient is blocked at masked positions.
template <class S>
TensorT<S> masked_fill(const TensorT<S>& x, const std::vector<uint8_t>& mask, S value) {
    if (mask.size() != x.numel())
        throw std::invalid_argument("masked_fill: mask size " + std::to_string(mask.size()) +
                                    " != tensor size " + std::to_string(x.numel()));
    std::vector<S> out(x.numel());
    const auto& xv = x.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] = mask[i] ? value : xv[i];
    auto xn = x.node_ptr();
    return detail::make_op<S>(x.shape(), std::move(out), {xn},
                              [xn, mask](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
                                  auto& gx = t.buf(xn.get());
                                  for (size_t i = 0; i < g.size(); ++i)
                                      if (!mask[i]) gx[i] += g[i];
                              });
}

// Inverted dropout: kept activations are scaled by 1/(1-p) so the expected
// forward value is unchanged. p = 0 is the identity.
template <class S>
TensorT<S> dropout(const TensorT<S>& x, double p, Rng& rng) {
    if (p <= 0.0) return x;
    if (p >= 1.0) throw std::invalid_argument("dropout: p must be < 1");
    std::vector<S> keep(x.numel());
    const S inv = static_cast<S>(1.0 / (1.0 - p));
    for (auto& k : keep) k = rng.uniform() >= p ? inv : S(0);
    std::vector<S> out(x.numel());
    const auto& xv = x.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * keep[i];
    auto xn = x.node_ptr();
    return detail::make_op<S>(x.shape(), std::move(out), {xn},
                              [xn, keep = std::move(keep)](const NodeT<S>&, const std::vector<S>& g, GradTableT<S>& t) {
                                  auto& gx = t.buf(xn.get());
                                  for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * keep[i];
                              });
}

}  // namespace spts::ad
