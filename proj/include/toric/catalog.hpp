#pragma once

#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "toric/kernel.hpp"
#include "toric/ma.hpp"

namespace toric {

// Product of projective factors (CP^{n_i}, c_i * reference metric), globally
// scaled by q. Projective inducedness requires every q*c_i to be a positive
// integer.
struct ProductSpec {
    std::vector<std::pair<int, Rational>> factors;
    long long q = 1;
};

inline std::string product_name(const std::vector<int>& dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += " x ";
        s += "CP^" + std::to_string(dims[i]);
    }
    return s;
}

// Products of projective spaces of total dimension 2..4: the full list of
// candidates for rotation-invariant projectively induced KE metrics in those
// dimensions.
inline std::vector<std::vector<int>> projective_product_catalog() {
    return {{2}, {1, 1}, {3}, {2, 1}, {1, 1, 1}, {4}, {3, 1}, {2, 2}, {2, 1, 1}, {1, 1, 1, 1}};
}

namespace detail {

// node-based map: references stay valid across later inserts, so handing
// them out is safe once the lock is dropped
inline const Poly& fs_det_b(int n, long long m) {
    static std::mutex guard;
    static std::map<std::pair<int, long long>, Poly> memo;
    std::scoped_lock lock(guard);
    auto key = std::make_pair(n, m);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, det_b(fubini_study_kernel(n, static_cast<int>(m)))).first;
    return it->second;
}

inline Poly fs_base(int n, long long m) {
    Poly base = Poly::constant(n, 1);
    for (int i = 0; i < n; ++i) base += Poly::variable(n, i) * Rational(1, m);
    return base;
}

// det B(K) == K^sigma for K = prod_i fs(n_i, m_i) on disjoint variable
// blocks. det B splits block by block (cross entries of B vanish because
// K_ij factors as K_i K_j / K there), so the identity holds iff every
// per-factor identity det_b(fs(n_i,m_i)) * base_i^(2 m_i (N-n_i)) ==
// base_i^(m_i sigma) does; setting the other blocks to zero shows the
// factor identities are also necessary. sigma may be a non-integer rational
// as long as every m_i * sigma is a nonnegative integer.
inline bool factored_residual_zero(const std::vector<int>& dims, const std::vector<long long>& mult,
                                   const Rational& sigma) {
    long long total = 0;
    for (int n : dims) total += n;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        int n = dims[i];
        long long m = mult[i];
        Rational t = sigma * m;
        if (denominator(t) != 1 || t < 0) return false;
        long long ti = numerator(t).convert_to<long long>();
        const Poly& d = fs_det_b(n, m);
        long long lift = 2 * m * (total - n);
        if (d.total_degree() + lift != ti) return false;
        Poly base = fs_base(n, m);
        if (d * base.pow(static_cast<unsigned>(lift)) != base.pow(static_cast<unsigned>(ti))) return false;
    }
    return true;
}

}  // namespace detail

// Einstein normalization of a product: the verified coefficient vector and
// the constant, plus the lcm-based table c_i = lcm(n_j+1)/(n_i+1) that is
// often quoted for these products. The two disagree whenever the factor
// dimensions are not all equal; the flag records which case we are in.
struct Normalization {
    std::vector<long long> c;
    Rational lambda;
    int sigma = 0;
    std::vector<long long> lcm_rule_c;
    bool matches_lcm_rule = false;
};

// Search over primitive positive integer vectors c with c_i <= c_max for the
// one whose product kernel prod_i fs(n_i, c_i) satisfies det B = K^sigma for
// some sigma in [0, 2N); each candidate is decided by exact polynomial
// comparison, never by a closed-form guess. The survivor is unique: the
// per-factor degree count forces (n_i+1)/c_i constant, and primitivity pins
// the scale.
inline Normalization einstein_normalization(const std::vector<int>& dims, long long c_max = 6) {
    if (dims.empty()) throw Error("einstein_normalization needs at least one factor");
    long long total = 0;
    for (int n : dims) {
        if (n < 1) throw Error("factor dimensions must be positive");
        total += n;
    }
    std::size_t k = dims.size();
    std::vector<long long> cur(k, 1);
    Normalization out;
    bool found = false;
    while (!found) {
        long long g = 0;
        for (long long c : cur) g = std::gcd(g, c);
        if (g == 1) {
            for (int sigma = 0; sigma < 2 * total && !found; ++sigma) {
                if (detail::factored_residual_zero(dims, cur, Rational(sigma))) {
                    out.c = cur;
                    out.sigma = sigma;
                    out.lambda = lambda_for_sigma(static_cast<int>(total), Rational(sigma));
                    found = true;
                }
            }
        }
        if (found) break;
        std::size_t pos = 0;
        while (pos < k && cur[pos] == c_max) cur[pos++] = 1;
        if (pos == k) break;
        ++cur[pos];
    }
    if (!found) throw NormalizationNotFound("no Einstein normalization with coefficients <= " + std::to_string(c_max));
    long long l = 1;
    for (int n : dims) l = std::lcm(l, static_cast<long long>(n) + 1);
    for (int n : dims) out.lcm_rule_c.push_back(l / (n + 1));
    out.matches_lcm_rule = out.c == out.lcm_rule_c;
    return out;
}

// One verified catalog line: normalization, Einstein data at global multiple
// q, and the embedding target dimension.
struct CatalogRow {
    std::string manifold;
    std::vector<int> dims;
    long long q = 1;
    std::vector<long long> c;
    Rational sigma;
    Rational lambda;
    bool residual_zero = false;
    bool positivity = false;
    Integer embedding_n;
    std::vector<long long> lcm_rule_c;
    bool matches_lcm_rule = false;
};

inline Integer embedding_dimension(const ProductSpec& spec) {
    if (spec.factors.empty()) throw Error("embedding_dimension needs at least one factor");
    if (spec.q < 1) throw Error("global multiple must be positive");
    Integer prod = 1;
    for (const auto& [n, c] : spec.factors) {
        if (n < 1) throw Error("factor dimensions must be positive");
        Rational m = c * spec.q;
        if (m <= 0 || denominator(m) != 1)
            throw NonIntegralMultiple("q*c must be a positive integer, got " + rat_to_string(m));
        auto mi = numerator(m).convert_to<unsigned>();
        prod *= binomial(static_cast<unsigned>(n) + mi, mi);
    }
    return prod - 1;
}

// Squared coefficients of the degree-c monomial map on n variables: alpha
// (with |alpha| <= c, the |alpha| = 0 slot included) paired with
// multinom(c, alpha). The map itself uses the square roots; storing squares
// keeps everything rational.
inline std::vector<std::pair<std::vector<long long>, Integer>> veronese_squared_coeffs(int n, int c) {
    if (n < 1 || c < 1) throw Error("veronese_squared_coeffs needs n >= 1, c >= 1");
    std::vector<std::pair<std::vector<long long>, Integer>> table;
    std::vector<long long> alpha(static_cast<std::size_t>(n), 0);
    while (true) {
        long long s = 0;
        for (long long a : alpha) s += a;
        if (s <= c) {
            Integer coeff = 1;
            long long rem = c;
            for (long long a : alpha) {
                coeff *= binomial(static_cast<unsigned>(rem), static_cast<unsigned>(a));
                rem -= a;
            }
            table.emplace_back(alpha, coeff);
        }
        std::size_t pos = 0;
        while (pos < alpha.size() && alpha[pos] == c) alpha[pos++] = 0;
        if (pos == alpha.size()) break;
        ++alpha[pos];
    }
    return table;
}

// Per-factor Veronese data for the product embedding into CP^N.
struct EmbeddingData {
    Integer target_dimension;
    std::vector<long long> degrees;
    std::vector<std::vector<std::pair<std::vector<long long>, Integer>>> squared_coeffs;
};

inline EmbeddingData embedding_data(const ProductSpec& spec) {
    EmbeddingData out;
    out.target_dimension = embedding_dimension(spec);
    for (const auto& [n, c] : spec.factors) {
        long long m = numerator(Rational(c * spec.q)).convert_to<long long>();
        out.degrees.push_back(m);
        out.squared_coeffs.push_back(veronese_squared_coeffs(n, static_cast<int>(m)));
    }
    return out;
}

// The degree-c monomial map with squared coefficients multinom(c, alpha)
// pulls the reference kernel 1 + sum x back to its c-th power: summing the
// squared coefficients against x^alpha must reproduce (1 + sum x)^c exactly.
inline bool veronese_pullback_check(int n, int c) {
    if (c < 1) throw Error("veronese_pullback_check needs c >= 1");
    Poly lhs(n);
    for (const auto& [alpha, coeff] : veronese_squared_coeffs(n, c)) {
        Mono m{};
        for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(alpha[static_cast<std::size_t>(j)]);
        lhs += Poly::monomial(n, m, Rational(coeff));
    }
    Poly rhs = Poly::constant(n, 1);
    for (int i = 0; i < n; ++i) rhs += Poly::variable(n, i);
    return lhs == rhs.pow(static_cast<unsigned>(c));
}

// Verify one catalog product at global multiple q. The kernel of the scaled
// metric is prod_i fs(n_i, q c_i) and the Einstein exponent becomes
// sigma = 2N - g/q with lambda = 2g/q, an integer only when q divides g;
// the factored residual check handles the rational case exactly. Positivity
// is sampled factor by factor: B of a disjoint-block product is block
// diagonal with each block a positive multiple of the factor's B, so factor
// samples decide the product.
inline CatalogRow verify_product(const std::vector<int>& dims, long long q = 1) {
    if (q < 1) throw Error("global multiple must be positive");
    Normalization norm = einstein_normalization(dims);
    long long total = 0;
    for (int n : dims) total += n;
    CatalogRow row;
    row.manifold = product_name(dims);
    row.dims = dims;
    row.q = q;
    row.c = norm.c;
    row.lcm_rule_c = norm.lcm_rule_c;
    row.matches_lcm_rule = norm.matches_lcm_rule;
    Rational g = 2 * total - norm.sigma;
    row.sigma = 2 * total - g / q;
    row.lambda = norm.lambda / q;
    std::vector<long long> mult;
    for (long long c : norm.c) mult.push_back(c * q);
    row.residual_zero = detail::factored_residual_zero(dims, mult, row.sigma);
    row.positivity = true;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        Kernel factor = fubini_study_kernel(dims[i], static_cast<int>(mult[i]));
        if (!metric_positivity_sample(factor, default_positivity_grid(dims[i]))) row.positivity = false;
    }
    ProductSpec spec;
    for (std::size_t i = 0; i < dims.size(); ++i) spec.factors.emplace_back(dims[i], Rational(norm.c[i]));
    spec.q = q;
    row.embedding_n = embedding_dimension(spec);
    return row;
}

inline std::vector<CatalogRow> verify_catalog(int dim_filter = 0, long long q = 1) {
    std::vector<CatalogRow> rows;
    for (const auto& dims : projective_product_catalog()) {
        long long total = 0;
        for (int n : dims) total += n;
        if (dim_filter != 0 && total != dim_filter) continue;
        rows.push_back(verify_product(dims, q));
    }
    return rows;
}

}  // namespace toric
