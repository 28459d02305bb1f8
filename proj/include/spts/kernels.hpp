#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

// Low-level dense kernels. The autodiff ops and the incremental decoder both
// call these, so training-graph forwards and cached inference produce
// bit-identical numbers. Every kernel accumulates each output element over a
// fixed serial index order (row-wise independent), which keeps results
// invariant to how callers batch or tile the surrounding loops.

namespace spts::kernels {

namespace detail {

// 4x32 register tile: for each output element the k loop is a straight
// serial fma chain, so results do not depend on how rows/columns are blocked
// (the remainder paths below follow the same per-element order).
template <class S>
void gemm_tile4x32(const S* __restrict a, const S* __restrict b, S* __restrict c,
                   int i0, int j0, int k, int n) {
    S acc[4][32];
    for (int r = 0; r < 4; ++r)
        for (int j = 0; j < 32; ++j) acc[r][j] = c[static_cast<size_t>(i0 + r) * n + j0 + j];
    const S* a0 = a + static_cast<size_t>(i0) * k;
    for (int p = 0; p < k; ++p) {
        const S* __restrict bp = b + static_cast<size_t>(p) * n + j0;
        const S av0 = a0[p];
        const S av1 = a0[k + p];
        const S av2 = a0[2 * k + p];
        const S av3 = a0[3 * k + p];
        for (int j = 0; j < 32; ++j) acc[0][j] += av0 * bp[j];
        for (int j = 0; j < 32; ++j) acc[1][j] += av1 * bp[j];
        for (int j = 0; j < 32; ++j) acc[2][j] += av2 * bp[j];
        for (int j = 0; j < 32; ++j) acc[3][j] += av3 * bp[j];
    }
    for (int r = 0; r < 4; ++r)
        for (int j = 0; j < 32; ++j) c[static_cast<size_t>(i0 + r) * n + j0 + j] = acc[r][j];
}

template <class S>
void gemm_rows(const S* __restrict a, const S* __restrict b, S* __restrict c, int i0,
               int i1, int j0, int j1, int k, int n) {
    for (int i = i0; i < i1; ++i) {
        S* __restrict ci = c + static_cast<size_t>(i) * n;
        const S* __restrict ai = a + static_cast<size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const S av = ai[p];
            const S* __restrict bp = b + static_cast<size_t>(p) * n;
            for (int j = j0; j < j1; ++j) ci[j] += av * bp[j];
        }
    }
}

template <class S>
void gemm_acc(const S* __restrict a, const S* __restrict b, S* __restrict c, int m, int k,
              int n) {
    const int m4 = m - m % 4;
    const int n32 = n - n % 32;
    for (int i0 = 0; i0 < m4; i0 += 4)
        for (int j0 = 0; j0 < n32; j0 += 32) gemm_tile4x32(a, b, c, i0, j0, k, n);
    if (n32 < n) gemm_rows(a, b, c, 0, m4, n32, n, k, n);
    if (m4 < m) gemm_rows(a, b, c, m4, m, 0, n, k, n);
}

}  // namespace detail

// C[m x n] = A[m x k] @ B[k x n], row-major. C is overwritten.
template <class S>
void matmul(const S* __restrict a, const S* __restrict b, S* __restrict c,
            int m, int k, int n) {
    std::fill(c, c + static_cast<size_t>(m) * n, S(0));
    detail::gemm_acc(a, b, c, m, k, n);
}

// C[m x n] += A[m x k] @ B[k x n]
template <class S>
void matmul_acc(const S* __restrict a, const S* __restrict b, S* __restrict c,
                int m, int k, int n) {
    detail::gemm_acc(a, b, c, m, k, n);
}

// C[m x n] = A[m x k] @ B[n x k]^T. B is transposed into a scratch buffer so
// the product runs through the same vectorizable accumulation loop as
// matmul(), with the identical per-element summation order over k.
template <class S>
void matmul_nt(const S* __restrict a, const S* __restrict b, S* __restrict c,
               int m, int k, int n) {
    std::vector<S> bt(static_cast<size_t>(k) * n);
    for (int j = 0; j < n; ++j)
        for (int p = 0; p < k; ++p)
            bt[static_cast<size_t>(p) * n + j] = b[static_cast<size_t>(j) * k + p];
    matmul(a, bt.data(), c, m, k, n);
}

// C[m x n] += A[m x k] @ B[n x k]^T
template <class S>
void matmul_nt_acc(const S* __restrict a, const S* __restrict b, S* __restrict c,
                   int m, int k, int n) {
    std::vector<S> bt(static_cast<size_t>(k) * n);
    for (int j = 0; j < n; ++j)
        for (int p = 0; p < k; ++p)
            bt[static_cast<size_t>(p) * n + j] = b[static_cast<size_t>(j) * k + p];
    matmul_acc(a, bt.data(), c, m, k, n);
}

// C[k x n] += A[m x k]^T @ B[m x n]  (A stored row-major as m x k)
template <class S>
void matmul_tn_acc(const S* __restrict a, const S* __restrict b, S* __restrict c,
                   int m, int k, int n) {
    std::vector<S> at(static_cast<size_t>(k) * m);
    for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p)
            at[static_cast<size_t>(p) * m + i] = a[static_cast<size_t>(i) * k + p];
    detail::gemm_acc(at.data(), b, c, k, m, n);
}

// In-place softmax of one row of length n, stabilized by max subtraction.
template <class S>
void softmax_row(S* __restrict x, int n) {
    S mx = x[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
    S sum = S(0);
    for (int i = 0; i < n; ++i) {
        x[i] = std::exp(x[i] - mx);
        sum += x[i];
    }
    const S inv = S(1) / sum;
    for (int i = 0; i < n; ++i) x[i] *= inv;
}

// y = gain * (x - mean) / sqrt(var + eps) + bias over one row of length n.
// Optionally reports the computed mean and inverse stddev for backward.
template <class S>
void layer_norm_row(const S* __restrict x, const S* __restrict gain,
                    const S* __restrict bias, S eps, S* __restrict y, int n,
                    S* mean_out = nullptr, S* inv_std_out = nullptr) {
    S mean = S(0);
    for (int i = 0; i < n; ++i) mean += x[i];
    mean /= static_cast<S>(n);
    S var = S(0);
    for (int i = 0; i < n; ++i) {
        const S d = x[i] - mean;
        var += d * d;
    }
    var /= static_cast<S>(n);
    const S inv_std = S(1) / std::sqrt(var + eps);
    for (int i = 0; i < n; ++i) y[i] = gain[i] * (x[i] - mean) * inv_std + bias[i];
    if (mean_out) *mean_out = mean;
    if (inv_std_out) *inv_std_out = inv_std;
}

template <class S>
inline S gelu_scalar(S x) {
    return S(0.5) * x * (S(1) + std::erf(x * S(0.70710678118654752440)));
}

template <class S>
inline S gelu_grad_scalar(S x) {
    const S cdf = S(0.5) * (S(1) + std::erf(x * S(0.70710678118654752440)));
    const S pdf = std::exp(S(-0.5) * x * x) * S(0.39894228040143267794);
    return cdf + x * pdf;
}

}  // namespace spts::kernels
