#pragma once

#include <numeric>
#include <optional>
#include <vector>

#include "toric/rational.hpp"

namespace toric {

using QVec = std::vector<Rational>;
using QMat = std::vector<QVec>;

inline int mat_rank(QMat a) {
    if (a.empty()) return 0;
    std::size_t rows = a.size(), cols = a[0].size();
    int rank = 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < rows; ++col) {
        std::size_t piv = row;
        while (piv < rows && a[piv][col] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[row]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == row || a[r][col] == 0) continue;
            Rational f = a[r][col] / a[row][col];
            for (std::size_t c = col; c < cols; ++c) a[r][c] -= f * a[row][c];
        }
        ++row;
        ++rank;
    }
    return rank;
}

inline Rational mat_det(QMat a) {
    std::size_t n = a.size();
    Rational det = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a[piv][col] == 0) ++piv;
        if (piv == n) return 0;
        if (piv != col) {
            std::swap(a[piv], a[col]);
            det = -det;
        }
        det *= a[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            if (a[r][col] == 0) continue;
            Rational f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    return det;
}

// Unique solution of a square system, or nullopt when singular.
inline std::optional<QVec> mat_solve(QMat a, QVec b) {
    std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a[piv][col] == 0) ++piv;
        if (piv == n) return std::nullopt;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            Rational f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    QVec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

inline std::optional<QMat> mat_inverse(const QMat& a) {
    std::size_t n = a.size();
    QMat aug = a;
    QMat inv(n, QVec(n, 0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && aug[piv][col] == 0) ++piv;
        if (piv == n) return std::nullopt;
        std::swap(aug[piv], aug[col]);
        std::swap(inv[piv], inv[col]);
        Rational d = aug[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            aug[col][c] /= d;
            inv[col][c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || aug[r][col] == 0) continue;
            Rational f = aug[r][col];
            for (std::size_t c = 0; c < n; ++c) {
                aug[r][c] -= f * aug[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

// One-dimensional kernel of an (n-1) x n rational matrix scaled to a primitive
// integer vector; nullopt when the kernel is not one-dimensional.
inline std::optional<std::vector<long long>> kernel_direction(QMat a, std::size_t n) {
    std::size_t rows = a.size();
    std::vector<std::size_t> pivot_col;
    std::size_t row = 0;
    std::vector<bool> is_pivot(n, false);
    for (std::size_t col = 0; col < n && row < rows; ++col) {
        std::size_t piv = row;
        while (piv < rows && a[piv][col] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[row]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == row || a[r][col] == 0) continue;
            Rational f = a[r][col] / a[row][col];
            for (std::size_t c = 0; c < n; ++c) a[r][c] -= f * a[row][c];
        }
        pivot_col.push_back(col);
        is_pivot[col] = true;
        ++row;
    }
    if (pivot_col.size() != n - 1) return std::nullopt;
    std::size_t free_col = 0;
    while (is_pivot[free_col]) ++free_col;
    QVec d(n, 0);
    d[free_col] = 1;
    for (std::size_t r = 0; r < pivot_col.size(); ++r)
        d[pivot_col[r]] = -a[r][free_col] / a[r][pivot_col[r]];
    // clear denominators, divide by gcd
    Integer lcm = 1;
    for (const auto& v : d) lcm = boost::multiprecision::lcm(lcm, Integer(denominator(v)));
    std::vector<Integer> iv(n);
    Integer g = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Rational scaled = d[i] * Rational(lcm);
        iv[i] = numerator(scaled);
        g = boost::multiprecision::gcd(g, iv[i]);
    }
    std::vector<long long> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<long long>(iv[i] / g);
    return out;
}

// Scales a nonzero rational direction to its primitive integer representative.
inline std::vector<long long> primitive_direction(const QVec& d) {
    Integer lcm = 1;
    for (const auto& v : d) lcm = boost::multiprecision::lcm(lcm, Integer(denominator(v)));
    std::vector<Integer> iv(d.size());
    Integer g = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        Rational scaled = d[i] * Rational(lcm);
        iv[i] = numerator(scaled);
        g = boost::multiprecision::gcd(g, iv[i]);
    }
    std::vector<long long> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = static_cast<long long>(iv[i] / g);
    return out;
}

}  // namespace toric
