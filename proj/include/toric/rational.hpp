#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <string>

#include "toric/errors.hpp"

namespace toric {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

// Canonical textual form "num/den", den >= 1, always explicit (so artifacts
// are byte-stable). Assumes the value is already canonicalized, which
// mpq_rational guarantees.
inline std::string rat_to_string(const Rational& r) {
    Integer num = numerator(r);
    Integer den = denominator(r);
    return num.str() + "/" + den.str();
}

// Accepts "p" or "p/q". Divides two integers instead of using mpq string
// input, because mpq_set_str does not reduce to lowest terms.
inline Rational rat_from_string(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(s));
        Integer num(s.substr(0, slash));
        Integer den(s.substr(slash + 1));
        if (den == 0) throw ParseError("rational with zero denominator: " + s);
        return Rational(num) / Rational(den);
    } catch (const std::exception&) {
        throw ParseError("bad rational literal: " + s);
    }
}

inline int rat_sign(const Rational& r) { return r.sign(); }

inline Rational rat_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

inline double rat_to_double(const Rational& r) { return r.convert_to<double>(); }

inline Integer int_pow(Integer base, unsigned e) {
    Integer out = 1;
    while (e) {
        if (e & 1) out *= base;
        base *= base;
        e >>= 1;
    }
    return out;
}

inline Rational rat_pow(const Rational& base, unsigned e) {
    Rational out = 1;
    Rational b = base;
    unsigned k = e;
    while (k) {
        if (k & 1) out *= b;
        b *= b;
        k >>= 1;
    }
    return out;
}

inline Integer binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    Integer out = 1;
    for (unsigned i = 0; i < k; ++i) {
        out *= Integer(n - i);
        out /= Integer(i + 1);
    }
    return out;
}

// Continued-fraction rational reconstruction of a double, denominator capped.
// Returns the last convergent whose denominator stays within the cap.
inline Rational rationalize(double v, std::uint64_t max_den = 1000000) {
    bool neg = v < 0;
    if (neg) v = -v;
    Integer p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double x = v;
    for (int iter = 0; iter < 64; ++iter) {
        double fl = std::floor(x);
        if (fl > 9e18) break;
        Integer a(static_cast<long long>(fl));
        Integer p2 = a * p1 + p0;
        Integer q2 = a * q1 + q0;
        if (q2 > Integer(max_den)) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        double frac = x - fl;
        if (frac < 1e-15) break;
        x = 1.0 / frac;
    }
    if (q1 == 0) return Rational(0);
    Rational r = Rational(p1) / Rational(q1);
    return neg ? Rational(-r) : r;
}

}  // namespace toric
