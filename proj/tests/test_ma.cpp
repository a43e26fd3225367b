#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "toric/ma.hpp"

using namespace toric;

namespace {

Kernel numeric_kernel(int n, const std::vector<std::pair<std::vector<int>, Rational>>& terms) {
    Kernel k;
    k.n = n;
    Poly p = Poly::constant(n, 1);
    for (int i = 0; i < n; ++i) p += Poly::variable(n, i);
    for (const auto& [e, c] : terms) {
        Mono m{};
        for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(e[static_cast<std::size_t>(j)]);
        p += Poly::monomial(n, m, c);
    }
    k.K = p;
    return k;
}

// random Bochner-normalized numeric kernel
Kernel random_kernel(std::mt19937_64& rng, int n) {
    std::vector<std::pair<std::vector<int>, Rational>> terms;
    int extra = 1 + static_cast<int>(rng() % 4);
    for (int t = 0; t < extra; ++t) {
        std::vector<int> e(static_cast<std::size_t>(n));
        int total = 0;
        for (int j = 0; j < n; ++j) {
            e[static_cast<std::size_t>(j)] = static_cast<int>(rng() % 3);
            total += e[static_cast<std::size_t>(j)];
        }
        if (total < 2) e[static_cast<std::size_t>(rng() % static_cast<unsigned>(n))] += 2;
        terms.emplace_back(e, Rational(1 + static_cast<long long>(rng() % 16), 8));
    }
    return numeric_kernel(n, terms);
}

}  // namespace

TEST_CASE("hessian closed forms") {
    auto k1 = fubini_study_kernel(1, 1);
    auto b1 = hessian(k1);
    CHECK(b1[0][0] == Poly::constant(1, 1));

    auto k2 = fubini_study_kernel(1, 2);
    auto b2 = hessian(k2);
    CHECK(b2[0][0] == k2.K);

    auto k3 = fubini_study_kernel(2, 1);  // 1 + x + y
    auto b3 = hessian(k3);
    Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1), one = Poly::constant(2, 1);
    CHECK(b3[0][0] == one + y);
    CHECK(b3[0][1] == -x);
    CHECK(b3[1][0] == -y);
    CHECK(b3[1][1] == one + x);
}

TEST_CASE("hessian at origin is the identity") {
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 3; ++n) {
        auto k = random_kernel(rng, n);
        auto b = hessian(k);
        QVec origin(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(origin) == (i == j ? 1 : 0));
    }
}

TEST_CASE("det_b closed forms") {
    CHECK(det_b(fubini_study_kernel(2, 1)) == fubini_study_kernel(2, 1).K);
    auto prod = product_kernel(fubini_study_kernel(1, 1), fubini_study_kernel(1, 1));
    CHECK(det_b(prod) == prod.K * prod.K);
    CHECK(det_b(fubini_study_kernel(1, 1)) == Poly::constant(1, 1));
}

TEST_CASE("det_b constant term is 1") {
    std::mt19937_64 rng(13);
    for (int n = 1; n <= 3; ++n) {
        auto k = random_kernel(rng, n);
        CHECK(det_b(k).constant_term() == 1);
    }
}

TEST_CASE("det_b agrees with naive cofactor expansion") {
    std::mt19937_64 rng(17);
    for (int n = 1; n <= 3; ++n)
        for (int rep = 0; rep < 4; ++rep) {
            auto k = random_kernel(rng, n);
            CHECK(det_b(k) == det_b_naive(k));
        }
    auto hex = kernel_from_polytope(catalog_polytope("alz2d"));
    CHECK(det_b(hex) == det_b_naive(hex));
}

TEST_CASE("symbolic square kernel specializes to the product case") {
    auto sq = kernel_from_polytope(catalog_polytope("simplex(1,1)*simplex(1,1)"));
    Poly d = det_b(sq);
    // substitute a_11 = 1 in the symbolic determinant
    Poly spec = d.subst_rational(2, 1).remap_vars({0, 1, -1}, 2);
    auto prod = product_kernel(fubini_study_kernel(1, 1), fubini_study_kernel(1, 1));
    CHECK(spec == prod.K * prod.K);
}

TEST_CASE("det_b commutes with substitution") {
    std::mt19937_64 rng(23);
    auto sq = kernel_from_polytope(catalog_polytope("simplex(1,1)*simplex(1,1)"));
    auto hex = kernel_from_polytope(catalog_polytope("alz2d"));
    for (const auto& k : {sq, hex}) {
        std::map<std::string, Rational> assign;
        std::vector<Rational> vals;
        for (int i = 0; i < k.num_unknowns(); ++i) {
            Rational v(1 + static_cast<long long>(rng() % 12), 4);
            assign[k.unknown_name(i)] = v;
            vals.push_back(v);
        }
        Poly sym = det_b(k);
        for (int i = 0; i < k.num_unknowns(); ++i) sym = sym.subst_rational(k.n + i, vals[static_cast<std::size_t>(i)]);
        std::vector<int> drop(static_cast<std::size_t>(k.nvars()), -1);
        for (int i = 0; i < k.n; ++i) drop[static_cast<std::size_t>(i)] = i;
        CHECK(sym.remap_vars(drop, k.n) == det_b(substitute(k, assign)));
    }
}

TEST_CASE("block product identity carries the cross factors") {
    // det_B(K1 (x) K2) = K1^(2 n2) K2^(2 n1) det_B(K1) det_B(K2)
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 3; ++rep) {
        auto k1 = random_kernel(rng, 1 + static_cast<int>(rng() % 2));
        auto k2 = random_kernel(rng, 1);
        auto prod = product_kernel(k1, k2);
        Poly lhs = det_b(prod);
        std::vector<int> m1(static_cast<std::size_t>(k1.n)), m2(static_cast<std::size_t>(k2.n));
        for (int i = 0; i < k1.n; ++i) m1[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < k2.n; ++i) m2[static_cast<std::size_t>(i)] = k1.n + i;
        Poly d1 = det_b(k1).remap_vars(m1, prod.n);
        Poly d2 = det_b(k2).remap_vars(m2, prod.n);
        Poly p1 = k1.K.remap_vars(m1, prod.n);
        Poly p2 = k2.K.remap_vars(m2, prod.n);
        Poly rhs = p1.pow(static_cast<unsigned>(2 * k2.n)) * p2.pow(static_cast<unsigned>(2 * k1.n)) * d1 * d2;
        CHECK(lhs == rhs);
    }
}

TEST_CASE("residual identities") {
    CHECK(residual(fubini_study_kernel(2, 1), 1).is_zero());
    auto prod = product_kernel(fubini_study_kernel(1, 1), fubini_study_kernel(1, 1));
    CHECK(residual(prod, 2).is_zero());
    CHECK(residual(fubini_study_kernel(1, 1), 0).is_zero());
    Poly x = Poly::variable(1, 0);
    CHECK(residual(fubini_study_kernel(1, 1), 1) == -x);
    CHECK(lambda_for_sigma(2, 1) == 6);
    CHECK(lambda_for_sigma(2, 2) == 4);
}

TEST_CASE("fubini study residuals across dimensions") {
    for (int n = 1; n <= 4; ++n) {
        CHECK(residual(fubini_study_kernel(n, 1), n - 1).is_zero());
        CHECK(lambda_for_sigma(n, n - 1) == 2 * (n + 1));
    }
    CHECK(residual(fubini_study_kernel(1, 2), 1).is_zero());
    CHECK(lambda_for_sigma(1, 1) == 2);
}

TEST_CASE("fubini study determinant is an exact base power") {
    for (int n = 1; n <= 3; ++n)
        for (int c = 1; c <= 3; ++c) {
            Poly base = Poly::constant(n, 1);
            for (int i = 0; i < n; ++i) base += Poly::variable(n, i) * Rational(1, c);
            CHECK(det_b(fubini_study_kernel(n, c)) == base.pow(static_cast<unsigned>(2 * c * n - n - 1)));
        }
}

TEST_CASE("integer sigma fails when the Einstein constant is fractional") {
    // fs(2,2): lambda would be 3, sigma = 5/2; no integer sigma can vanish
    auto k = fubini_study_kernel(2, 2);
    for (int sigma = 0; sigma <= 3; ++sigma) CHECK(!residual(k, sigma).is_zero());
}

TEST_CASE("power_of_kernel uses block factors consistently") {
    auto prod = product_kernel(fubini_study_kernel(2, 3), fubini_study_kernel(1, 2));
    CHECK(power_of_kernel(prod, 4) == prod.K.pow(4));
}

TEST_CASE("metric positivity sampling") {
    auto k = fubini_study_kernel(2, 1);
    CHECK(metric_positivity_sample(k, {{Rational(1), Rational(1)}, {Rational(1, 7), Rational(5)}}));
    CHECK(metric_positivity_sample(k, {}));
    CHECK_THROWS_AS(metric_positivity_sample(k, {{Rational(0), Rational(1)}}), NonPositiveSamplePoint);
    auto sym = kernel_from_polytope(catalog_polytope("alz2d"));
    CHECK_THROWS_AS(metric_positivity_sample(sym, {{Rational(1), Rational(1)}}), SymbolicKernel);
    // positive coefficients give a log-sum-exp convex potential, so even a
    // lopsided cross term stays positive definite
    auto lopsided = numeric_kernel(2, {{{1, 1}, Rational(100)}});
    CHECK(metric_positivity_sample(lopsided, {{Rational(1), Rational(1)}}));
    // a negative cross coefficient breaks convexity: the 2x2 minor at (1,1)
    // of 1+x+y-xy/2 is 1 - 9/4 < 0
    auto bad = numeric_kernel(2, {{{1, 1}, Rational(-1, 2)}});
    CHECK(!metric_positivity_sample(bad, {{Rational(1), Rational(1)}}));
}

TEST_CASE("dimension guard") {
    Kernel k;
    k.n = 7;
    k.K = Poly::constant(7, 1);
    CHECK_THROWS_AS(det_b(k), DimensionTooLarge);
}
