#pragma once

#include <vector>

#include "toric/kernel.hpp"
#include "toric/polytope.hpp"

namespace toric {

struct MomentSample {
    QVec x;
    QVec mu;
};

// mu_k(x) = x_k K_k(x) / K(x), normalized so the image closure is the Newton
// polytope of K. Positive coefficients keep K > 0 on the whole orthant, so
// the image is defined everywhere we sample.
inline QVec moment_map(const Kernel& k, const QVec& x) {
    if (k.symbolic()) throw SymbolicKernel();
    if (static_cast<int>(x.size()) != k.n) throw Error("sample arity mismatch");
    for (const auto& c : x)
        if (c <= 0) throw NonPositiveInput("moment_map needs a point in the open positive orthant");
    for (const auto& [m, c] : k.K.terms())
        if (c <= 0) throw NonPositiveInput("moment_map needs positive kernel coefficients");
    Rational kv = k.K.eval(x);
    QVec mu(static_cast<std::size_t>(k.n));
    for (int i = 0; i < k.n; ++i)
        mu[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] * k.K.derivative(i).eval(x) / kv;
    return mu;
}

// Power-of-two grid on the positive orthant, count points per axis centered
// on 1, count^n in total. Exact rationals so downstream membership tests
// stay exact; the exponent range grows with count, pushing samples toward
// the vertices.
inline std::vector<QVec> log_grid(int n, int count) {
    if (n < 1 || count < 1) throw Error("log_grid needs n >= 1, count >= 1");
    std::vector<Rational> axis;
    int lo = -count / 2;
    for (int i = 0; i < count; ++i) {
        int e = lo + i;
        axis.push_back(e >= 0 ? Rational(Integer(1) << e) : Rational(1, Integer(1) << -e));
    }
    std::vector<QVec> pts;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        QVec x(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
        pts.push_back(std::move(x));
        std::size_t pos = 0;
        while (pos < idx.size() && idx[pos] == count - 1) idx[pos++] = 0;
        if (pos == idx.size()) break;
        ++idx[pos];
    }
    return pts;
}

// Exact membership of every sampled image, plus how closely the sampling
// approaches each vertex. Distances are reported squared to stay rational.
struct ConvexityReport {
    int total = 0;
    int inside = 0;
    bool all_inside = false;
    Rational max_vertex_distance_sq;
    std::vector<MomentSample> samples;
};

// Every moment image must lie in p (rational arithmetic, no tolerance), and
// the polytope must be the kernel's exact lattice support: both directions
// of the support condition, same as the kernel construction.
inline ConvexityReport convexity_check(const Kernel& k, const Polytope& p, const std::vector<QVec>& grid) {
    if (k.symbolic()) throw SymbolicKernel();
    if (p.dim() != k.n) throw SupportMismatch("polytope dimension differs from kernel arity");
    if (kernel_support(k) != p.lattice_points())
        throw SupportMismatch("kernel support is not the polytope's lattice point set");
    ConvexityReport report;
    report.total = static_cast<int>(grid.size());
    for (const auto& x : grid) {
        MomentSample s{x, moment_map(k, x)};
        if (p.contains(s.mu)) ++report.inside;
        report.samples.push_back(std::move(s));
    }
    report.all_inside = report.inside == report.total;
    report.max_vertex_distance_sq = 0;
    for (const auto& v : p.vertices()) {
        Rational best = -1;
        for (const auto& s : report.samples) {
            Rational d = 0;
            for (std::size_t j = 0; j < v.size(); ++j) {
                Rational diff = s.mu[j] - v[j];
                d += diff * diff;
            }
            if (best < 0 || d < best) best = d;
        }
        if (best > report.max_vertex_distance_sq) report.max_vertex_distance_sq = best;
    }
    return report;
}

}  // namespace toric
