#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toric/errors.hpp"
#include "toric/rational.hpp"

namespace toric {

// Packed exponent vector. Variable 0 occupies byte 0, so memcmp order is
// lexicographic with variable 0 most significant; keeping the x-block in the
// low bytes makes terms with equal x-part contiguous in a sorted map.
constexpr int kMonoCap = 64;
using Mono = std::array<std::uint8_t, kMonoCap>;

struct MonoLess {
    bool operator()(const Mono& a, const Mono& b) const noexcept {
        return std::memcmp(a.data(), b.data(), kMonoCap) < 0;
    }
};

inline Mono mono_zero() {
    Mono m{};
    return m;
}

inline Mono mono_var(int i, int e = 1) {
    Mono m{};
    m[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(e);
    return m;
}

inline Mono mono_add(const Mono& a, const Mono& b) {
    Mono out;
    for (int i = 0; i < kMonoCap; ++i) {
        unsigned s = unsigned(a[i]) + unsigned(b[i]);
        if (s > 255) throw Error("monomial exponent overflow");
        out[i] = static_cast<std::uint8_t>(s);
    }
    return out;
}

inline int mono_total_degree(const Mono& m) {
    int d = 0;
    for (int i = 0; i < kMonoCap; ++i) d += m[i];
    return d;
}

inline bool mono_is_zero(const Mono& m) {
    static const Mono z{};
    return std::memcmp(m.data(), z.data(), kMonoCap) == 0;
}

inline std::uint64_t mono_hash(const Mono& m) {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (int i = 0; i < kMonoCap; i += 8) {
        std::uint64_t c;
        std::memcpy(&c, m.data() + i, 8);
        c *= 0xff51afd7ed558ccdull;
        c ^= c >> 33;
        h = (h ^ c) * 0xc4ceb9fe1a85ec53ull;
    }
    return h ^ (h >> 29);
}

// Sparse multivariate polynomial over Rational in a fixed variable universe of
// nv slots. Canonical form: sorted terms, no zero coefficients.
class Poly {
public:
    using Terms = std::map<Mono, Rational, MonoLess>;

    explicit Poly(int nv = 0) : nv_(nv) {
        if (nv < 0 || nv > kMonoCap) throw Error("variable count out of range");
    }

    static Poly constant(int nv, const Rational& c) {
        Poly p(nv);
        if (c != 0) p.t_[mono_zero()] = c;
        return p;
    }

    static Poly variable(int nv, int i) {
        Poly p(nv);
        p.t_[mono_var(i)] = 1;
        return p;
    }

    static Poly monomial(int nv, const Mono& m, const Rational& c) {
        Poly p(nv);
        if (c != 0) p.t_[m] = c;
        return p;
    }

    static Poly from_sorted(int nv, std::vector<std::pair<Mono, Rational>>&& v) {
        Poly p(nv);
        auto hint = p.t_.end();
        for (auto& e : v) {
            if (e.second == 0) continue;
            hint = p.t_.emplace_hint(hint, e.first, std::move(e.second));
        }
        return p;
    }

    int nvars() const { return nv_; }
    const Terms& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    std::size_t size() const { return t_.size(); }

    bool is_constant() const {
        return t_.empty() || (t_.size() == 1 && mono_is_zero(t_.begin()->first));
    }

    Rational constant_term() const {
        auto it = t_.find(mono_zero());
        return it == t_.end() ? Rational(0) : it->second;
    }

    Rational coeff(const Mono& m) const {
        auto it = t_.find(m);
        return it == t_.end() ? Rational(0) : it->second;
    }

    void add_term(const Mono& m, const Rational& c) {
        if (c == 0) return;
        auto [it, inserted] = t_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) t_.erase(it);
        }
    }

    Poly& operator+=(const Poly& o) {
        check_universe(o);
        for (const auto& [m, c] : o.t_) add_term(m, c);
        return *this;
    }

    Poly& operator-=(const Poly& o) {
        check_universe(o);
        for (const auto& [m, c] : o.t_) add_term(m, Rational(-c));
        return *this;
    }

    friend Poly operator+(Poly a, const Poly& b) { a += b; return a; }
    friend Poly operator-(Poly a, const Poly& b) { a -= b; return a; }

    Poly operator-() const {
        Poly out(nv_);
        auto hint = out.t_.end();
        for (const auto& [m, c] : t_) hint = out.t_.emplace_hint(hint, m, Rational(-c));
        return out;
    }

    Poly& operator*=(const Rational& s) {
        if (s == 0) { t_.clear(); return *this; }
        for (auto& [m, c] : t_) c *= s;
        return *this;
    }

    friend Poly operator*(Poly a, const Rational& s) { a *= s; return a; }
    friend Poly operator*(const Rational& s, Poly a) { a *= s; return a; }

    friend Poly operator*(const Poly& a, const Poly& b) {
        a.check_universe(b);
        if (a.is_zero() || b.is_zero()) return Poly(a.nv_);
        const Poly& small = a.size() <= b.size() ? a : b;
        const Poly& big = a.size() <= b.size() ? b : a;
        if (small.size() * big.size() <= 4096) return mul_map(small, big);
        return mul_hashed(small, big);
    }

    bool operator==(const Poly& o) const { return nv_ == o.nv_ && t_ == o.t_; }
    bool operator!=(const Poly& o) const { return !(*this == o); }

    Poly pow(unsigned k) const {
        Poly out = constant(nv_, 1);
        for (unsigned i = 0; i < k; ++i) out = out * (*this);
        return out;
    }

    Poly derivative(int var) const {
        Poly out(nv_);
        auto hint = out.t_.end();
        for (const auto& [m, c] : t_) {
            int e = m[static_cast<std::size_t>(var)];
            if (e == 0) continue;
            Mono d = m;
            d[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(e - 1);
            hint = out.t_.emplace_hint(hint, d, c * e);
        }
        return out;
    }

    int degree_in(int var) const {
        int d = 0;
        for (const auto& [m, c] : t_) d = std::max(d, int(m[static_cast<std::size_t>(var)]));
        return d;
    }

    int total_degree() const {
        int d = 0;
        for (const auto& [m, c] : t_) d = std::max(d, mono_total_degree(m));
        return d;
    }

    bool uses_var(int var) const {
        for (const auto& [m, c] : t_)
            if (m[static_cast<std::size_t>(var)] != 0) return true;
        return false;
    }

    // Coefficient of var^k, with var's exponent removed from the monomials.
    Poly coeff_of_power(int var, int k) const {
        Poly out(nv_);
        for (const auto& [m, c] : t_) {
            if (m[static_cast<std::size_t>(var)] != k) continue;
            Mono d = m;
            d[static_cast<std::size_t>(var)] = 0;
            out.t_.emplace(d, c);
        }
        return out;
    }

    Poly subst_var(int var, const Poly& repl) const {
        check_universe(repl);
        int d = degree_in(var);
        if (d == 0) return *this;
        Poly out = coeff_of_power(var, d);
        for (int k = d - 1; k >= 0; --k) out = out * repl + coeff_of_power(var, k);
        return out;
    }

    Poly subst_rational(int var, const Rational& val) const {
        Poly out(nv_);
        for (const auto& [m, c] : t_) {
            int e = m[static_cast<std::size_t>(var)];
            if (e == 0) {
                out.add_term(m, c);
            } else {
                Mono d = m;
                d[static_cast<std::size_t>(var)] = 0;
                out.add_term(d, c * rat_pow(val, static_cast<unsigned>(e)));
            }
        }
        return out;
    }

    Rational eval(const std::vector<Rational>& point) const {
        if (static_cast<int>(point.size()) != nv_) throw Error("evaluation arity mismatch");
        Rational acc = 0;
        for (const auto& [m, c] : t_) {
            Rational term = c;
            for (int v = 0; v < nv_; ++v)
                if (m[static_cast<std::size_t>(v)])
                    term *= rat_pow(point[static_cast<std::size_t>(v)],
                                    m[static_cast<std::size_t>(v)]);
            acc += term;
        }
        return acc;
    }

    double eval_double(const std::vector<double>& point) const {
        double acc = 0;
        for (const auto& [m, c] : t_) {
            double term = rat_to_double(c);
            for (int v = 0; v < nv_; ++v) {
                int e = m[static_cast<std::size_t>(v)];
                for (int i = 0; i < e; ++i) term *= point[static_cast<std::size_t>(v)];
            }
            acc += term;
        }
        return acc;
    }

    // Moves every variable v to slot map[v]; map[v] = -1 requires v unused.
    Poly remap_vars(const std::vector<int>& map, int new_nv) const {
        Poly out(new_nv);
        auto hint = out.t_.end();
        std::vector<std::pair<Mono, Rational>> v;
        v.reserve(t_.size());
        for (const auto& [m, c] : t_) {
            Mono d{};
            for (int var = 0; var < nv_; ++var) {
                int e = m[static_cast<std::size_t>(var)];
                if (!e) continue;
                if (map[static_cast<std::size_t>(var)] < 0)
                    throw Error("remap drops a used variable");
                d[static_cast<std::size_t>(map[static_cast<std::size_t>(var)])] =
                    static_cast<std::uint8_t>(e);
            }
            v.emplace_back(d, c);
        }
        std::sort(v.begin(), v.end(),
                  [](const auto& x, const auto& y) { return MonoLess{}(x.first, y.first); });
        for (auto& e : v) hint = out.t_.emplace_hint(hint, e.first, std::move(e.second));
        return out;
    }

    // Groups terms by their exponents on variables [0, nx). Returned in
    // ascending lex order of the prefix; each group's polynomial keeps only
    // the suffix variables. Relies on the sorted map making prefixes contiguous.
    std::vector<std::pair<Mono, Poly>> split_by_prefix(int nx) const {
        std::vector<std::pair<Mono, Poly>> out;
        for (const auto& [m, c] : t_) {
            Mono pre{}, suf{};
            for (int i = 0; i < nx; ++i) pre[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)];
            for (int i = nx; i < kMonoCap; ++i) suf[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)];
            if (out.empty() || std::memcmp(out.back().first.data(), pre.data(), kMonoCap) != 0)
                out.emplace_back(pre, Poly(nv_));
            out.back().second.t_.emplace_hint(out.back().second.t_.end(), suf, c);
        }
        return out;
    }

    bool all_coeffs_nonneg() const {
        for (const auto& [m, c] : t_)
            if (c < 0) return false;
        return true;
    }

    bool all_coeffs_nonpos() const {
        for (const auto& [m, c] : t_)
            if (c > 0) return false;
        return true;
    }

    // Single-divisor reduction by lex leading terms; succeeds only when the
    // remainder is exactly zero.
    std::optional<Poly> try_divide_exact(const Poly& d) const {
        check_universe(d);
        if (d.is_zero()) return std::nullopt;
        Poly rem = *this;
        Poly quot(nv_);
        const auto& dl = *d.t_.rbegin();
        int guard = 0;
        while (!rem.is_zero()) {
            if (++guard > 2000000) return std::nullopt;
            const auto& rl = *rem.t_.rbegin();
            Mono qm{};
            bool divisible = true;
            for (int i = 0; i < kMonoCap; ++i) {
                int e = int(rl.first[static_cast<std::size_t>(i)]) - int(dl.first[static_cast<std::size_t>(i)]);
                if (e < 0) { divisible = false; break; }
                qm[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(e);
            }
            if (!divisible) return std::nullopt;
            Rational qc = rl.second / dl.second;
            Poly qt = Poly::monomial(nv_, qm, qc);
            quot += qt;
            rem -= qt * d;
        }
        return quot;
    }

    std::string str(const std::vector<std::string>& names) const {
        if (t_.empty()) return "0";
        std::string out;
        for (const auto& [m, c] : t_) {
            if (!out.empty()) out += " + ";
            out += rat_to_string(c);
            for (int v = 0; v < nv_; ++v) {
                int e = m[static_cast<std::size_t>(v)];
                if (!e) continue;
                out += "*" + names[static_cast<std::size_t>(v)];
                if (e > 1) out += "^" + std::to_string(e);
            }
        }
        return out;
    }

private:
    void check_universe(const Poly& o) const {
        if (nv_ != o.nv_) throw Error("mixed polynomial variable universes");
    }

    static Poly mul_map(const Poly& small, const Poly& big) {
        Poly out(small.nv_);
        for (const auto& [ma, ca] : small.t_)
            for (const auto& [mb, cb] : big.t_) out.add_term(mono_add(ma, mb), ca * cb);
        return out;
    }

    // Open-addressing accumulator keyed by monomial; dense entry storage is
    // sorted once at the end, so the result is independent of probe order.
    static Poly mul_hashed(const Poly& small, const Poly& big) {
        std::size_t expect = small.size() * big.size();
        std::size_t cap = 64;
        while (cap < expect / 2 && cap < (std::size_t(1) << 22)) cap <<= 1;
        std::vector<std::int32_t> slots(cap, -1);
        std::vector<std::pair<Mono, Rational>> dense;
        dense.reserve(std::min(expect, cap));

        auto rehash = [&]() {
            cap <<= 1;
            slots.assign(cap, -1);
            for (std::size_t i = 0; i < dense.size(); ++i) {
                std::uint64_t h = mono_hash(dense[i].first) & (cap - 1);
                while (slots[h] >= 0) h = (h + 1) & (cap - 1);
                slots[h] = static_cast<std::int32_t>(i);
            }
        };

        for (const auto& [ma, ca] : small.t_) {
            for (const auto& [mb, cb] : big.t_) {
                Mono m = mono_add(ma, mb);
                std::uint64_t h = mono_hash(m) & (cap - 1);
                for (;;) {
                    std::int32_t idx = slots[h];
                    if (idx < 0) {
                        slots[h] = static_cast<std::int32_t>(dense.size());
                        dense.emplace_back(m, ca * cb);
                        if (dense.size() * 10 > cap * 7) rehash();
                        break;
                    }
                    if (std::memcmp(dense[static_cast<std::size_t>(idx)].first.data(), m.data(),
                                    kMonoCap) == 0) {
                        dense[static_cast<std::size_t>(idx)].second += ca * cb;
                        break;
                    }
                    h = (h + 1) & (cap - 1);
                }
            }
        }
        std::sort(dense.begin(), dense.end(),
                  [](const auto& x, const auto& y) { return MonoLess{}(x.first, y.first); });
        return from_sorted(small.nv_, std::move(dense));
    }

    int nv_;
    Terms t_;
};

}  // namespace toric
