#pragma once

#include <map>
#include <string>
#include <vector>

#include "toric/poly.hpp"
#include "toric/polytope.hpp"

namespace toric {

// K(x) = 1 + sum x_i + sum a_m x^m over the combined variable space:
// slots [0, n) hold the x variables, slots [n, n + k) the unknown
// coefficients a_m, ordered by the lex order of their exponent vectors.
struct Kernel {
    int n = 0;
    std::vector<std::vector<long long>> unknown_exps;
    Poly K{0};
    // Optional disjoint-variable-block factorization (set by product_kernel /
    // fubini_study_kernel); used to expand powers block by block.
    std::vector<Poly> block_factors;

    int num_unknowns() const { return static_cast<int>(unknown_exps.size()); }
    int nvars() const { return n + num_unknowns(); }

    bool symbolic() const {
        for (int i = 0; i < num_unknowns(); ++i)
            if (K.uses_var(n + i)) return true;
        return false;
    }

    std::string unknown_name(int i) const {
        std::string s = "a";
        for (long long e : unknown_exps[static_cast<std::size_t>(i)]) s += "_" + std::to_string(e);
        return s;
    }

    std::vector<std::string> var_names() const {
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
        for (int i = 0; i < num_unknowns(); ++i) names.push_back(unknown_name(i));
        return names;
    }
};

// One term per lattice point: 1 for the origin, 1 for each unit point, a fresh
// positive unknown for everything else. Both directions of the support
// condition: a solution kernel must be supported on exactly the lattice points.
inline Kernel kernel_from_polytope(const Polytope& p) {
    auto pts = p.lattice_points();
    int n = p.dim();
    std::vector<long long> origin(static_cast<std::size_t>(n), 0);
    auto has = [&](const std::vector<long long>& q) {
        return std::find(pts.begin(), pts.end(), q) != pts.end();
    };
    if (!has(origin)) throw MissingOriginVertex("origin is not a lattice point");
    std::vector<std::vector<long long>> unknowns;
    for (const auto& m : pts) {
        if (m == origin) continue;
        long long total = 0;
        for (long long e : m) total += e;
        bool unit = total == 1;
        if (unit) continue;
        unknowns.push_back(m);
    }
    for (int i = 0; i < n; ++i) {
        auto e = origin;
        e[static_cast<std::size_t>(i)] = 1;
        if (!has(e)) throw MissingOriginVertex("unit lattice point x" + std::to_string(i + 1) + " missing");
    }
    Kernel k;
    k.n = n;
    k.unknown_exps = unknowns;  // pts are lex sorted, so unknown order is lex
    int nv = k.nvars();
    if (nv > kMonoCap) throw DimensionTooLarge("too many unknowns for the monomial representation");
    Poly K = Poly::constant(nv, 1);
    for (int i = 0; i < n; ++i) K += Poly::variable(nv, i);
    for (int i = 0; i < k.num_unknowns(); ++i) {
        Mono m{};
        for (int j = 0; j < n; ++j)
            m[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(unknowns[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        m[static_cast<std::size_t>(n + i)] = 1;
        K += Poly::monomial(nv, m, 1);
    }
    k.K = std::move(K);
    return k;
}

// (1 + (x_1 + ... + x_n)/c)^c: the rescaling that makes the c-th multiple of
// the reference metric Bochner-normalized.
inline Kernel fubini_study_kernel(int n, int c) {
    if (n < 1 || c < 1) throw Error("fubini_study_kernel needs n >= 1, c >= 1");
    Poly base = Poly::constant(n, 1);
    for (int i = 0; i < n; ++i) base += Poly::variable(n, i) * Rational(1, c);
    Kernel k;
    k.n = n;
    k.K = base.pow(static_cast<unsigned>(c));
    k.block_factors = {k.K};
    return k;
}

// K1 * K2 on disjoint variable blocks. x blocks are concatenated first,
// unknown blocks after them, preserving each factor's unknown order.
inline Kernel product_kernel(const Kernel& a, const Kernel& b) {
    Kernel out;
    out.n = a.n + b.n;
    out.unknown_exps.reserve(static_cast<std::size_t>(a.num_unknowns() + b.num_unknowns()));
    for (const auto& m : a.unknown_exps) {
        auto e = m;
        e.resize(static_cast<std::size_t>(out.n), 0);
        out.unknown_exps.push_back(std::move(e));
    }
    for (const auto& m : b.unknown_exps) {
        std::vector<long long> e(static_cast<std::size_t>(out.n), 0);
        for (int j = 0; j < b.n; ++j) e[static_cast<std::size_t>(a.n + j)] = m[static_cast<std::size_t>(j)];
        out.unknown_exps.push_back(std::move(e));
    }
    int nv = out.nvars();
    if (nv > kMonoCap) throw DimensionTooLarge("too many unknowns for the monomial representation");
    std::vector<int> amap(static_cast<std::size_t>(a.nvars()));
    for (int i = 0; i < a.n; ++i) amap[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < a.num_unknowns(); ++i) amap[static_cast<std::size_t>(a.n + i)] = out.n + i;
    std::vector<int> bmap(static_cast<std::size_t>(b.nvars()));
    for (int i = 0; i < b.n; ++i) bmap[static_cast<std::size_t>(i)] = a.n + i;
    for (int i = 0; i < b.num_unknowns(); ++i) bmap[static_cast<std::size_t>(b.n + i)] = out.n + a.num_unknowns() + i;
    Poly ka = a.K.remap_vars(amap, nv);
    Poly kb = b.K.remap_vars(bmap, nv);
    out.K = ka * kb;
    // factor lists concatenate; a factorless input contributes itself
    auto push_factors = [&](const Kernel& src, const std::vector<int>& map, const Poly& whole) {
        if (src.block_factors.empty()) {
            out.block_factors.push_back(whole);
        } else {
            for (const auto& f : src.block_factors) out.block_factors.push_back(f.remap_vars(map, nv));
        }
    };
    push_factors(a, amap, ka);
    push_factors(b, bmap, kb);
    return out;
}

// Bochner normalization: constant term 1 and unit linear coefficients, which
// is exactly "log K has no constant or linear part beyond sum x_i".
inline bool bochner_check(const Kernel& k) {
    if (k.symbolic()) throw SymbolicKernel();
    if (k.K.constant_term() != 1) return false;
    for (int i = 0; i < k.n; ++i)
        if (k.K.coeff(mono_var(i)) != 1) return false;
    return true;
}

inline Kernel substitute(const Kernel& k, const std::map<std::string, Rational>& assignment) {
    Poly cur = k.K;
    for (int i = 0; i < k.num_unknowns(); ++i) {
        int var = k.n + i;
        if (!cur.uses_var(var)) continue;
        auto it = assignment.find(k.unknown_name(i));
        if (it == assignment.end()) throw MissingAssignment("no value for " + k.unknown_name(i));
        cur = cur.subst_rational(var, it->second);
    }
    std::vector<int> map(static_cast<std::size_t>(k.nvars()), -1);
    for (int i = 0; i < k.n; ++i) map[static_cast<std::size_t>(i)] = i;
    Kernel out;
    out.n = k.n;
    out.K = cur.remap_vars(map, k.n);
    return out;
}

// Exponent support of a numeric kernel as lattice points, lex sorted.
inline std::vector<std::vector<long long>> kernel_support(const Kernel& k) {
    std::vector<std::vector<long long>> out;
    for (const auto& [m, c] : k.K.terms()) {
        std::vector<long long> e(static_cast<std::size_t>(k.n));
        for (int j = 0; j < k.n; ++j) e[static_cast<std::size_t>(j)] = m[static_cast<std::size_t>(j)];
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace toric
