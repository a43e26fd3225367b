#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "toric/errors.hpp"
#include "toric/linalg.hpp"
#include "toric/rational.hpp"

namespace toric {

// Closed half-space {x : normal . x <= offset} with primitive integer normal.
struct HalfSpace {
    std::vector<long long> normal;
    Rational offset;
};

inline void primitivize(HalfSpace& h) {
    long long g = 0;
    for (long long v : h.normal) g = std::gcd(g, v);
    if (g == 0) throw Error("zero normal vector");
    if (g > 1) {
        for (long long& v : h.normal) v /= g;
        h.offset /= g;
    }
}

// Affine lattice map y = A (x - t) with |det A| = 1.
struct UnimodularMap {
    std::vector<std::vector<long long>> A;
    QVec t;

    QVec apply(const QVec& x) const {
        std::size_t n = A.size();
        QVec y(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) y[i] += Rational(A[i][j]) * (x[j] - t[j]);
        return y;
    }
};

// Outcome of the Delzant test; on failure identifies the first bad vertex.
struct DelzantReport {
    bool ok = false;
    std::string reason;
    QVec bad_vertex;
    std::vector<std::vector<long long>> bad_edges;  // primitive directions found there
    Integer edge_det = 0;
    // per-vertex edge frames (columns = primitive edge directions), on success
    std::vector<std::pair<QVec, std::vector<std::vector<long long>>>> frames;
};

class Polytope {
public:
    Polytope(int n, std::vector<HalfSpace> halfspaces) : n_(n), hs_(std::move(halfspaces)) {
        if (n < 1) throw Error("dimension must be positive");
        for (auto& h : hs_) {
            if (static_cast<int>(h.normal.size()) != n) throw Error("normal arity mismatch");
            primitivize(h);
        }
    }

    int dim() const { return n_; }
    const std::vector<HalfSpace>& halfspaces() const { return hs_; }

    bool contains(const QVec& x) const {
        for (const auto& h : hs_) {
            Rational dot = 0;
            for (int i = 0; i < n_; ++i) dot += Rational(h.normal[static_cast<std::size_t>(i)]) * x[static_cast<std::size_t>(i)];
            if (dot > h.offset) return false;
        }
        return true;
    }

    bool contains(const std::vector<long long>& x) const {
        QVec q(x.begin(), x.end());
        return contains(q);
    }

    // True iff the recession cone {d : N d <= 0} is trivial. Checks the full
    // normal-matrix rank (lines) and every potential extreme ray cut out by
    // n-1 normals.
    bool is_bounded() const {
        std::size_t m = hs_.size();
        QMat normals(m, QVec(static_cast<std::size_t>(n_)));
        for (std::size_t i = 0; i < m; ++i)
            for (int j = 0; j < n_; ++j) normals[i][static_cast<std::size_t>(j)] = hs_[i].normal[static_cast<std::size_t>(j)];
        if (mat_rank(normals) < n_) return false;
        auto ray_escapes = [&](const std::vector<long long>& d) {
            for (const auto& h : hs_) {
                long long dot = 0;
                for (int j = 0; j < n_; ++j) dot += h.normal[static_cast<std::size_t>(j)] * d[static_cast<std::size_t>(j)];
                if (dot > 0) return false;
            }
            return true;
        };
        if (n_ == 1) return !ray_escapes({1}) && !ray_escapes({-1});
        std::vector<std::size_t> idx(static_cast<std::size_t>(n_ - 1));
        std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
            if (pos == idx.size()) {
                QMat sub;
                for (std::size_t i : idx) sub.push_back(normals[i]);
                auto d = kernel_direction(sub, static_cast<std::size_t>(n_));
                if (!d) return false;
                auto neg = *d;
                for (auto& v : neg) v = -v;
                return ray_escapes(*d) || ray_escapes(neg);
            }
            for (std::size_t i = start; i < m; ++i) {
                idx[pos] = i;
                if (rec(pos + 1, i + 1)) return true;
            }
            return false;
        };
        return !rec(0, 0);
    }

    // Exact vertex set via exhaustive n-subset intersection.
    const std::vector<QVec>& vertices() const {
        if (verts_) return *verts_;
        if (!is_bounded()) throw UnboundedPolytope();
        std::size_t m = hs_.size();
        if (static_cast<int>(m) < n_) throw DegeneratePolytope();
        std::set<QVec> found;
        std::vector<std::size_t> idx(static_cast<std::size_t>(n_));
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
            if (pos == idx.size()) {
                QMat a(static_cast<std::size_t>(n_), QVec(static_cast<std::size_t>(n_)));
                QVec b(static_cast<std::size_t>(n_));
                for (int r = 0; r < n_; ++r) {
                    for (int c = 0; c < n_; ++c)
                        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                            hs_[idx[static_cast<std::size_t>(r)]].normal[static_cast<std::size_t>(c)];
                    b[static_cast<std::size_t>(r)] = hs_[idx[static_cast<std::size_t>(r)]].offset;
                }
                auto x = mat_solve(a, b);
                if (x && contains(*x)) found.insert(*x);
                return;
            }
            for (std::size_t i = start; i < m; ++i) {
                idx[pos] = i;
                rec(pos + 1, i + 1);
            }
        };
        rec(0, 0);
        if (found.empty()) throw DegeneratePolytope("no vertices: empty polytope");
        std::vector<QVec> vs(found.begin(), found.end());
        // full-dimensionality: affine rank of the vertex set must be n
        QMat diffs;
        for (std::size_t i = 1; i < vs.size(); ++i) {
            QVec d(static_cast<std::size_t>(n_));
            for (int j = 0; j < n_; ++j) d[static_cast<std::size_t>(j)] = vs[i][static_cast<std::size_t>(j)] - vs[0][static_cast<std::size_t>(j)];
            diffs.push_back(d);
        }
        if (diffs.empty() || mat_rank(diffs) < n_) throw DegeneratePolytope("not full-dimensional");
        verts_ = std::move(vs);
        return *verts_;
    }

    std::vector<std::size_t> active_at(const QVec& x) const {
        std::vector<std::size_t> act;
        for (std::size_t i = 0; i < hs_.size(); ++i) {
            Rational dot = 0;
            for (int j = 0; j < n_; ++j) dot += Rational(hs_[i].normal[static_cast<std::size_t>(j)]) * x[static_cast<std::size_t>(j)];
            if (dot == hs_[i].offset) act.push_back(i);
        }
        return act;
    }

    // Primitive edge directions out of a vertex. Segment [v,w] is an edge iff
    // the inequalities tight at both endpoints cut an affine line (rank n-1);
    // this stays correct when redundant inequalities make vertices lie on
    // more than n tight hyperplanes.
    std::vector<std::vector<long long>> edge_directions(const QVec& v) const {
        const auto& vs = vertices();
        auto act_v = active_at(v);
        std::vector<std::vector<long long>> dirs;
        for (const auto& w : vs) {
            if (w == v) continue;
            auto act_w = active_at(w);
            std::vector<std::size_t> common;
            std::set_intersection(act_v.begin(), act_v.end(), act_w.begin(), act_w.end(),
                                  std::back_inserter(common));
            if (static_cast<int>(common.size()) < n_ - 1) continue;
            QMat sub;
            for (std::size_t i : common) {
                QVec row(static_cast<std::size_t>(n_));
                for (int j = 0; j < n_; ++j) row[static_cast<std::size_t>(j)] = hs_[i].normal[static_cast<std::size_t>(j)];
                sub.push_back(row);
            }
            if (mat_rank(sub) != n_ - 1) continue;
            QVec d(static_cast<std::size_t>(n_));
            for (int j = 0; j < n_; ++j) d[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j)] - v[static_cast<std::size_t>(j)];
            dirs.push_back(primitive_direction(d));
        }
        std::sort(dirs.begin(), dirs.end());
        dirs.erase(std::unique(dirs.begin(), dirs.end()), dirs.end());
        return dirs;
    }

    // Delzant test: integer vertices, exactly n edges per vertex, unimodular
    // edge frame.
    DelzantReport is_delzant() const {
        DelzantReport rep;
        const auto& vs = vertices();
        for (const auto& v : vs) {
            for (const auto& c : v)
                if (denominator(c) != 1) {
                    rep.reason = "non-integer vertex";
                    rep.bad_vertex = v;
                    return rep;
                }
            auto dirs = edge_directions(v);
            if (static_cast<int>(dirs.size()) != n_) {
                rep.reason = "vertex with " + std::to_string(dirs.size()) + " edges";
                rep.bad_vertex = v;
                rep.bad_edges = dirs;
                return rep;
            }
            QMat e(static_cast<std::size_t>(n_), QVec(static_cast<std::size_t>(n_)));
            for (int r = 0; r < n_; ++r)
                for (int c = 0; c < n_; ++c)
                    e[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = dirs[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
            Rational det = mat_det(e);
            if (det != 1 && det != -1) {
                rep.reason = "edge frame determinant " + rat_to_string(det);
                rep.bad_vertex = v;
                rep.bad_edges = dirs;
                rep.edge_det = numerator(det);
                return rep;
            }
            rep.frames.emplace_back(v, dirs);
        }
        rep.ok = true;
        return rep;
    }

    // Delta cap Z^n, ascending lex; requires the polytope to sit in the
    // positive orthant (normalized position).
    std::vector<std::vector<long long>> lattice_points() const {
        const auto& vs = vertices();
        std::vector<long long> lo(static_cast<std::size_t>(n_)), hi(static_cast<std::size_t>(n_));
        for (int j = 0; j < n_; ++j) {
            Rational mn = vs[0][static_cast<std::size_t>(j)], mx = vs[0][static_cast<std::size_t>(j)];
            for (const auto& v : vs) {
                mn = std::min(mn, v[static_cast<std::size_t>(j)]);
                mx = std::max(mx, v[static_cast<std::size_t>(j)]);
            }
            if (mn < 0) throw NotNormalized("vertex with negative coordinate");
            lo[static_cast<std::size_t>(j)] = 0;
            Integer c = numerator(mx) / denominator(mx);
            hi[static_cast<std::size_t>(j)] = static_cast<long long>(c);
        }
        std::vector<std::vector<long long>> pts;
        std::vector<long long> cur = lo;
        for (;;) {
            if (contains(cur)) pts.push_back(cur);
            int j = n_ - 1;
            while (j >= 0 && cur[static_cast<std::size_t>(j)] == hi[static_cast<std::size_t>(j)]) {
                cur[static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)];
                --j;
            }
            if (j < 0) break;
            ++cur[static_cast<std::size_t>(j)];
        }
        std::sort(pts.begin(), pts.end());
        return pts;
    }

    // Maps the chosen vertex to the origin with its edges on the positive
    // axes; returns the image polytope and the lattice map for replay.
    std::pair<Polytope, UnimodularMap> normalize_to_origin(const QVec& vertex) const {
        const auto& vs = vertices();
        if (std::find(vs.begin(), vs.end(), vertex) == vs.end()) throw NotAVertex();
        auto rep = is_delzant();
        if (!rep.ok) throw NotDelzant(rep.reason);
        auto dirs = edge_directions(vertex);
        QMat e(static_cast<std::size_t>(n_), QVec(static_cast<std::size_t>(n_)));
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c)
                e[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = dirs[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
        auto inv = mat_inverse(e);
        if (!inv) throw NotDelzant("degenerate edge frame");
        UnimodularMap map;
        map.A.assign(static_cast<std::size_t>(n_), std::vector<long long>(static_cast<std::size_t>(n_)));
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c) {
                const Rational& q = (*inv)[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
                if (denominator(q) != 1) throw NotDelzant("edge frame not unimodular");
                map.A[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = static_cast<long long>(numerator(q));
            }
        map.t = vertex;
        // half-space transform: normal . x <= off  becomes  (E^T normal) . y <= off - normal . v
        std::vector<HalfSpace> out;
        for (const auto& h : hs_) {
            HalfSpace g;
            g.normal.assign(static_cast<std::size_t>(n_), 0);
            for (int c = 0; c < n_; ++c)
                for (int r = 0; r < n_; ++r)
                    g.normal[static_cast<std::size_t>(c)] += h.normal[static_cast<std::size_t>(r)] *
                        static_cast<long long>(numerator(e[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]));
            Rational shift = 0;
            for (int r = 0; r < n_; ++r) shift += Rational(h.normal[static_cast<std::size_t>(r)]) * vertex[static_cast<std::size_t>(r)];
            g.offset = h.offset - shift;
            out.push_back(std::move(g));
        }
        return {Polytope(n_, std::move(out)), std::move(map)};
    }

    // Facet-set equality after canonical sorting.
    bool operator==(const Polytope& o) const {
        if (n_ != o.n_) return false;
        auto key = [](const Polytope& p) {
            std::vector<std::pair<std::vector<long long>, Rational>> k;
            for (const auto& h : p.hs_) k.emplace_back(h.normal, h.offset);
            std::sort(k.begin(), k.end());
            return k;
        };
        return key(*this) == key(o);
    }

private:
    int n_;
    std::vector<HalfSpace> hs_;
    mutable std::optional<std::vector<QVec>> verts_;
};

inline Polytope product(const Polytope& a, const Polytope& b) {
    int n = a.dim() + b.dim();
    std::vector<HalfSpace> hs;
    for (const auto& h : a.halfspaces()) {
        HalfSpace g;
        g.normal = h.normal;
        g.normal.resize(static_cast<std::size_t>(n), 0);
        g.offset = h.offset;
        hs.push_back(std::move(g));
    }
    for (const auto& h : b.halfspaces()) {
        HalfSpace g;
        g.normal.assign(static_cast<std::size_t>(n), 0);
        for (int j = 0; j < b.dim(); ++j) g.normal[static_cast<std::size_t>(a.dim() + j)] = h.normal[static_cast<std::size_t>(j)];
        g.offset = h.offset;
        hs.push_back(std::move(g));
    }
    return Polytope(n, std::move(hs));
}

inline Polytope scale(const Polytope& p, const Rational& k) {
    if (k <= 0) throw Error("scale factor must be positive");
    std::vector<HalfSpace> hs = p.halfspaces();
    for (auto& h : hs) h.offset *= k;
    return Polytope(p.dim(), std::move(hs));
}

inline Polytope scale(const Polytope& p, long long k) { return scale(p, Rational(k)); }

inline Polytope simplex_polytope(int n, long long c) {
    std::vector<HalfSpace> hs;
    for (int i = 0; i < n; ++i) {
        HalfSpace h;
        h.normal.assign(static_cast<std::size_t>(n), 0);
        h.normal[static_cast<std::size_t>(i)] = -1;
        h.offset = 0;
        hs.push_back(std::move(h));
    }
    HalfSpace top;
    top.normal.assign(static_cast<std::size_t>(n), 1);
    top.offset = c;
    hs.push_back(std::move(top));
    return Polytope(n, std::move(hs));
}

namespace detail {

inline Polytope make_rows(int n, const std::vector<std::pair<std::vector<long long>, long long>>& rows) {
    std::vector<HalfSpace> hs;
    for (const auto& [normal, off] : rows) hs.push_back({normal, Rational(off)});
    return Polytope(n, std::move(hs));
}

inline std::optional<Polytope> named_polytope(const std::string& name) {
    if (name == "alz2d")
        return make_rows(2, {{{1, 0}, 2}, {{0, 1}, 2}, {{-1, 0}, 0}, {{0, -1}, 0}, {{1, -1}, 1}, {{-1, 1}, 1}});
    if (name == "alz3d")
        return make_rows(3, {{{-1, 0, 0}, 0}, {{0, -1, 0}, 0}, {{0, 0, -1}, 0}, {{0, 0, 1}, 2},
                             {{1, 0, 1}, 3}, {{0, 1, -1}, 1}});
    if (name == "alz4d_a")
        return make_rows(4, {{{1, 0, 0, 0}, 2}, {{0, 1, 0, 0}, 2}, {{0, 0, 1, 0}, 2}, {{0, 0, 0, 1}, 2},
                             {{-1, 0, 0, 0}, 0}, {{0, -1, 0, 0}, 0}, {{0, 0, -1, 0}, 0}, {{0, 0, 0, -1}, 0},
                             {{1, 1, -1, -1}, 1}, {{-1, -1, 1, 1}, 1}});
    if (name == "alz4d_b")
        return make_rows(4, {{{-1, 0, 0, 0}, 0}, {{0, -1, 0, 0}, 0}, {{0, 0, -1, 0}, 0}, {{0, 0, 0, -1}, 0},
                             {{0, 0, 1, 0}, 2}, {{0, 0, 0, 1}, 2}, {{0, 0, 1, -1}, 1}, {{0, 0, -1, 1}, 1},
                             {{1, 0, -1, 0}, 1}, {{0, 1, 1, 0}, 3}});
    // x+y <= 3: corrects an evident misprint (x+y <= 1 is not simple and has no
    // interior lattice point; 3 restores the reflexive-translate structure the
    // other catalog entries share).
    if (name == "alz4d_c")
        return make_rows(4, {{{-1, 0, 0, 0}, 0}, {{0, -1, 0, 0}, 0}, {{0, 0, -1, 0}, 0}, {{0, 0, 0, -1}, 0},
                             {{1, 0, -1, 0}, 1}, {{0, 1, 0, -1}, 1}, {{0, 0, 1, 1}, 3}, {{1, 1, 0, 0}, 3},
                             {{-1, -1, 1, 1}, 1}});
    if (name.rfind("simplex(", 0) == 0 && name.back() == ')') {
        std::string body = name.substr(8, name.size() - 9);
        auto comma = body.find(',');
        if (comma == std::string::npos) throw UnknownCatalogName(name);
        try {
            int n = std::stoi(body.substr(0, comma));
            long long c = std::stoll(body.substr(comma + 1));
            if (n < 1 || n > 6 || c < 1) throw UnknownCatalogName(name);
            return simplex_polytope(n, c);
        } catch (const std::invalid_argument&) {
            throw UnknownCatalogName(name);
        }
    }
    return std::nullopt;
}

// Splits on '*' at paren depth zero.
inline std::vector<std::string> split_product(const std::string& s) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char ch : s) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == '*' && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

}  // namespace detail

inline Polytope catalog_polytope(const std::string& name) {
    std::string trimmed;
    for (char ch : name)
        if (ch != ' ') trimmed += ch;
    auto parts = detail::split_product(trimmed);
    std::optional<Polytope> acc;
    for (const auto& part : parts) {
        auto p = detail::named_polytope(part);
        if (!p) throw UnknownCatalogName(part);
        acc = acc ? product(*acc, *p) : *p;
    }
    return *acc;
}

}  // namespace toric
