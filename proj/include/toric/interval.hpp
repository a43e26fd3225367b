#pragma once

#include <vector>

#include "toric/poly.hpp"
#include "toric/rational.hpp"

namespace toric {

// Closed rational interval [lo, hi]; arithmetic is exact, so enclosures are
// tight per operation and never suffer rounding slop.
struct QInterval {
    Rational lo;
    Rational hi;

    bool valid() const { return lo <= hi; }
    bool contains_zero() const { return lo <= 0 && hi >= 0; }
    Rational width() const { return hi - lo; }
};

inline QInterval operator+(const QInterval& a, const QInterval& b) { return {a.lo + b.lo, a.hi + b.hi}; }

inline QInterval operator-(const QInterval& a, const QInterval& b) { return {a.lo - b.hi, a.hi - b.lo}; }

inline QInterval operator*(const QInterval& a, const QInterval& b) {
    Rational c1 = a.lo * b.lo, c2 = a.lo * b.hi, c3 = a.hi * b.lo, c4 = a.hi * b.hi;
    Rational lo = std::min(std::min(c1, c2), std::min(c3, c4));
    Rational hi = std::max(std::max(c1, c2), std::max(c3, c4));
    return {lo, hi};
}

inline QInterval scale_interval(const Rational& c, const QInterval& a) {
    if (c >= 0) return {c * a.lo, c * a.hi};
    return {c * a.hi, c * a.lo};
}

// x^e for x in a nonnegative interval: powers are monotone there.
inline QInterval pow_nonneg(const QInterval& a, int e) {
    if (e == 0) return {1, 1};
    return {rat_pow(a.lo, static_cast<unsigned>(e)), rat_pow(a.hi, static_cast<unsigned>(e))};
}

// Enclosure of p over a box with nonnegative coordinates. Each monomial is a
// product of nonnegative monotone factors, so its enclosure is exact; the sum
// over terms is where overestimation enters.
inline QInterval eval_over_box(const Poly& p, const std::vector<QInterval>& box) {
    if (static_cast<int>(box.size()) != p.nvars()) throw Error("box arity mismatch");
    QInterval acc{0, 0};
    for (const auto& [m, c] : p.terms()) {
        QInterval t{1, 1};
        for (int v = 0; v < p.nvars(); ++v) {
            int e = m[static_cast<std::size_t>(v)];
            if (e == 0) continue;
            const QInterval& b = box[static_cast<std::size_t>(v)];
            if (b.lo < 0) throw Error("box must be nonnegative");
            t = t * pow_nonneg(b, e);
        }
        acc = acc + scale_interval(c, t);
    }
    return acc;
}

}  // namespace toric
