#pragma once

#include <bit>
#include <functional>
#include <map>
#include <vector>

#include "toric/kernel.hpp"
#include "toric/linalg.hpp"
#include "toric/poly.hpp"

namespace toric {

// Metric matrix in the rotation-invariant reduction:
//   B_ij = delta_ij K K_i + x_i (K K_ij - K_i K_j),
// so that det B = K^(2n) det g. B(0) = I for Bochner-normalized kernels.
inline std::vector<std::vector<Poly>> hessian(const Kernel& k) {
    int n = k.n;
    int nv = k.K.nvars();
    std::vector<Poly> d1;
    d1.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) d1.push_back(k.K.derivative(i));
    std::vector<std::vector<Poly>> b(static_cast<std::size_t>(n), std::vector<Poly>(static_cast<std::size_t>(n), Poly(nv)));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Poly w = k.K * d1[static_cast<std::size_t>(i)].derivative(j) - d1[static_cast<std::size_t>(i)] * d1[static_cast<std::size_t>(j)];
            Poly entry = Poly::variable(nv, i) * w;
            if (i == j) entry += k.K * d1[static_cast<std::size_t>(i)];
            b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::move(entry);
        }
    }
    return b;
}

namespace detail {

// Laplace expansion over an explicit column set, rows taken in fixed order;
// minors memoized by column mask.
inline Poly poly_det(const std::vector<std::vector<Poly>>& m, const std::vector<int>& idx, int nv) {
    std::size_t sz = idx.size();
    if (sz == 0) return Poly::constant(nv, 1);
    std::map<std::uint32_t, Poly> memo;
    std::function<Poly(std::uint32_t, std::size_t)> rec = [&](std::uint32_t colmask, std::size_t row) -> Poly {
        if (colmask == 0) return Poly::constant(nv, 1);
        auto it = memo.find(colmask);
        if (it != memo.end()) return it->second;
        Poly acc(nv);
        int sign = 1;
        for (std::size_t j = 0; j < sz; ++j) {
            if (!(colmask & (1u << j))) continue;
            const Poly& entry = m[static_cast<std::size_t>(idx[row])][static_cast<std::size_t>(idx[j])];
            if (!entry.is_zero()) {
                Poly sub = rec(colmask & ~(1u << j), row + 1);
                if (sign > 0)
                    acc += entry * sub;
                else
                    acc -= entry * sub;
            }
            sign = -sign;
        }
        memo.emplace(colmask, acc);
        return acc;
    };
    // memo is keyed by column mask alone, valid because the row for a mask is
    // determined by its popcount
    return rec((1u << sz) - 1, 0);
}

}  // namespace detail

// Reference determinant: plain cofactor expansion of the B matrix.
inline Poly det_b_naive(const Kernel& k) {
    if (k.n > 6) throw DimensionTooLarge();
    auto b = hessian(k);
    std::vector<int> idx(static_cast<std::size_t>(k.n));
    for (int i = 0; i < k.n; ++i) idx[static_cast<std::size_t>(i)] = i;
    return detail::poly_det(b, idx, k.K.nvars());
}

// Production determinant. B = diag(K K_i) + diag(x) W with W_ij = K K_ij - K_i K_j
// symmetric, so multilinearity over columns gives
//   det B = sum_{S subset [n]} x^S det(W[S,S]) prod_{i not in S} K K_i.
// Shares the W minors and the diagonal products across subsets.
inline Poly det_b(const Kernel& k) {
    int n = k.n;
    if (n > 6) throw DimensionTooLarge();
    int nv = k.K.nvars();
    const Poly& K = k.K;
    std::vector<Poly> d1;
    for (int i = 0; i < n; ++i) d1.push_back(K.derivative(i));
    std::vector<Poly> diag;
    for (int i = 0; i < n; ++i) diag.push_back(K * d1[static_cast<std::size_t>(i)]);
    std::vector<std::vector<Poly>> w(static_cast<std::size_t>(n), std::vector<Poly>(static_cast<std::size_t>(n), Poly(nv)));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Poly wij = K * d1[static_cast<std::size_t>(i)].derivative(j) - d1[static_cast<std::size_t>(i)] * d1[static_cast<std::size_t>(j)];
            w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = wij;
            w[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = std::move(wij);
        }
    // diagonal complement products, memoized over masks of [n]
    std::vector<Poly> dprod(static_cast<std::size_t>(1) << n, Poly(nv));
    dprod[0] = Poly::constant(nv, 1);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        int low = std::countr_zero(mask);
        dprod[mask] = dprod[mask & (mask - 1)] * diag[static_cast<std::size_t>(low)];
    }
    Poly out(nv);
    for (std::uint32_t s = 0; s < (1u << n); ++s) {
        std::vector<int> idx;
        Mono xs{};
        for (int i = 0; i < n; ++i)
            if (s & (1u << i)) {
                idx.push_back(i);
                xs[static_cast<std::size_t>(i)] = 1;
            }
        Poly term = detail::poly_det(w, idx, nv);
        if (term.is_zero()) continue;
        term = term * dprod[(~s) & ((1u << n) - 1)];
        out += Poly::monomial(nv, xs, 1) * term;
    }
    return out;
}

// K^s, using the disjoint-block factorization when available (block powers
// multiply without coefficient collisions, which keeps intermediates small).
inline Poly power_of_kernel(const Kernel& k, unsigned s) {
    if (k.block_factors.size() > 1) {
        Poly out = Poly::constant(k.K.nvars(), 1);
        for (const auto& f : k.block_factors) out = out * f.pow(s);
        return out;
    }
    return k.K.pow(s);
}

// det B(K) - K^sigma; identically zero iff K solves the Einstein identity
// with lambda = 2(2n - sigma).
inline Poly residual(const Kernel& k, int sigma) {
    if (sigma < 0) throw Error("sigma must be nonnegative");
    return det_b(k) - power_of_kernel(k, static_cast<unsigned>(sigma));
}

inline Poly residual_vs_power(const Kernel& k, const Poly& p, unsigned s) {
    return det_b(k) - p.pow(s);
}

inline Rational lambda_for_sigma(int n, const Rational& sigma) { return 2 * (2 * n - sigma); }

// Five positive sample points spread across the orthant, including
// coordinate-asymmetric ones so off-diagonal metric terms get exercised.
inline std::vector<QVec> default_positivity_grid(int n) {
    std::vector<QVec> pts;
    pts.push_back(QVec(static_cast<std::size_t>(n), Rational(1, 2)));
    pts.push_back(QVec(static_cast<std::size_t>(n), Rational(1)));
    pts.push_back(QVec(static_cast<std::size_t>(n), Rational(2)));
    QVec a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        a[static_cast<std::size_t>(j)] = j % 2 == 0 ? Rational(1, 3) : Rational(2, 3);
        b[static_cast<std::size_t>(j)] = j % 2 == 0 ? Rational(3) : Rational(3, 2);
    }
    pts.push_back(a);
    pts.push_back(b);
    return pts;
}

// diag(1/x) B is symmetric and congruent to the Hermitian metric at positive
// points; positive definiteness is decided by exact leading principal minors.
inline bool metric_positivity_sample(const Kernel& k, const std::vector<QVec>& points) {
    if (k.symbolic()) throw SymbolicKernel();
    auto b = hessian(k);
    for (const auto& x : points) {
        if (static_cast<int>(x.size()) != k.n) throw Error("sample arity mismatch");
        for (const auto& c : x)
            if (c <= 0) throw NonPositiveSamplePoint();
        QMat m(static_cast<std::size_t>(k.n), QVec(static_cast<std::size_t>(k.n)));
        for (int i = 0; i < k.n; ++i)
            for (int j = 0; j < k.n; ++j)
                m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(x) / x[static_cast<std::size_t>(i)];
        for (int i = 0; i < k.n; ++i)
            for (int j = i + 1; j < k.n; ++j)
                if (m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
                    throw Error("scaled metric matrix not symmetric");
        for (int lead = 1; lead <= k.n; ++lead) {
            QMat sub(static_cast<std::size_t>(lead), QVec(static_cast<std::size_t>(lead)));
            for (int i = 0; i < lead; ++i)
                for (int j = 0; j < lead; ++j) sub[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (mat_det(sub) <= 0) return false;
        }
    }
    return true;
}

}  // namespace toric
