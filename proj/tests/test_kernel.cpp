#include <catch2/catch_amalgamated.hpp>

#include "toric/kernel.hpp"

using namespace toric;

TEST_CASE("unit square kernel has one unknown") {
    auto k = kernel_from_polytope(catalog_polytope("simplex(1,1)*simplex(1,1)"));
    CHECK(k.n == 2);
    REQUIRE(k.num_unknowns() == 1);
    CHECK(k.unknown_name(0) == "a_1_1");
    CHECK(k.K.size() == 4);
    CHECK(k.symbolic());
}

TEST_CASE("hexagon kernel: 7 terms, 4 unknowns in lex order") {
    auto k = kernel_from_polytope(catalog_polytope("alz2d"));
    REQUIRE(k.num_unknowns() == 4);
    CHECK(k.unknown_name(0) == "a_1_1");
    CHECK(k.unknown_name(1) == "a_1_2");
    CHECK(k.unknown_name(2) == "a_2_1");
    CHECK(k.unknown_name(3) == "a_2_2");
    CHECK(k.K.size() == 7);
}

TEST_CASE("simplex kernel has no unknowns") {
    auto k = kernel_from_polytope(catalog_polytope("simplex(2,1)"));
    CHECK(k.num_unknowns() == 0);
    CHECK(k.K.size() == 3);
    CHECK(!k.symbolic());
    CHECK(bochner_check(k));
}

TEST_CASE("kernel support equals lattice points for every catalog polytope") {
    for (const char* name : {"alz2d", "alz3d", "alz4d_a", "alz4d_b", "alz4d_c", "simplex(3,2)"}) {
        auto p = catalog_polytope(name);
        auto k = kernel_from_polytope(p);
        auto pts = p.lattice_points();
        CHECK(k.K.size() == pts.size());
        // every lattice point appears as an exponent vector
        std::size_t matched = 0;
        for (const auto& [m, c] : k.K.terms()) {
            std::vector<long long> e(static_cast<std::size_t>(p.dim()));
            for (int j = 0; j < p.dim(); ++j) e[static_cast<std::size_t>(j)] = m[static_cast<std::size_t>(j)];
            if (std::find(pts.begin(), pts.end(), e) != pts.end()) ++matched;
        }
        CHECK(matched == pts.size());
    }
}

TEST_CASE("kernel requires a normalized polytope") {
    // triangle with vertices (1,0),(2,0),(1,1): no origin
    Polytope p(2, {{{0, -1}, Rational(0)}, {{-1, 0}, Rational(-1)}, {{1, 1}, Rational(2)}});
    CHECK_THROWS_AS(kernel_from_polytope(p), MissingOriginVertex);
}

TEST_CASE("fubini study kernels") {
    auto k11 = fubini_study_kernel(1, 1);
    CHECK(k11.K == Poly::constant(1, 1) + Poly::variable(1, 0));

    auto k12 = fubini_study_kernel(1, 2);
    CHECK(k12.K.coeff(mono_zero()) == 1);
    CHECK(k12.K.coeff(mono_var(0)) == 1);
    CHECK(k12.K.coeff(mono_var(0, 2)) == Rational(1, 4));
    CHECK(k12.K.size() == 3);

    auto k22 = fubini_study_kernel(2, 2);
    CHECK(k22.K.coeff(mono_var(0)) == 1);
    CHECK(k22.K.coeff(mono_var(1)) == 1);
    CHECK(k22.K.coeff(mono_var(0, 2)) == Rational(1, 4));
    CHECK(k22.K.coeff(mono_var(1, 2)) == Rational(1, 4));
    CHECK(k22.K.coeff(mono_add(mono_var(0), mono_var(1))) == Rational(1, 2));
    CHECK(k22.K.size() == 6);
    CHECK(bochner_check(k22));
}

TEST_CASE("fubini study support is the scaled simplex") {
    for (int n = 1; n <= 3; ++n)
        for (int c = 1; c <= 3; ++c) {
            auto k = fubini_study_kernel(n, c);
            auto pts = scale(catalog_polytope("simplex(" + std::to_string(n) + ",1)"),
                             c).lattice_points();
            CHECK(kernel_support(k) == pts);
        }
}

TEST_CASE("product kernel") {
    auto k = product_kernel(fubini_study_kernel(1, 1), fubini_study_kernel(1, 1));
    CHECK(k.n == 2);
    CHECK(k.K.size() == 4);
    CHECK(k.K.coeff(mono_add(mono_var(0), mono_var(1))) == 1);
    CHECK(bochner_check(k));
    CHECK(k.block_factors.size() == 2);

    auto k6 = product_kernel(fubini_study_kernel(1, 2), fubini_study_kernel(1, 1));
    CHECK(k6.K.size() == 6);
    CHECK(bochner_check(k6));
}

TEST_CASE("product kernel block factors multiply back to K") {
    auto k = product_kernel(product_kernel(fubini_study_kernel(1, 2), fubini_study_kernel(2, 1)),
                            fubini_study_kernel(1, 3));
    REQUIRE(k.block_factors.size() == 3);
    Poly prod = Poly::constant(k.nvars(), 1);
    for (const auto& f : k.block_factors) prod = prod * f;
    CHECK(prod == k.K);
}

TEST_CASE("product kernel commutes with substitution") {
    auto sq = kernel_from_polytope(catalog_polytope("simplex(1,1)*simplex(1,1)"));
    auto sub = substitute(sq, {{"a_1_1", Rational(1)}});
    auto prod = product_kernel(fubini_study_kernel(1, 1), fubini_study_kernel(1, 1));
    CHECK(sub.K == prod.K);
}

TEST_CASE("bochner check") {
    CHECK(bochner_check(fubini_study_kernel(1, 2)));
    Kernel bad;
    bad.n = 1;
    bad.K = Poly::constant(1, 1) + Poly::variable(1, 0) * Rational(2);
    CHECK(!bochner_check(bad));
    auto sym = kernel_from_polytope(catalog_polytope("alz2d"));
    CHECK_THROWS_AS(bochner_check(sym), SymbolicKernel);
}

TEST_CASE("substitution") {
    auto sq = kernel_from_polytope(catalog_polytope("simplex(1,1)*simplex(1,1)"));
    CHECK_THROWS_AS(substitute(sq, {}), MissingAssignment);
    auto zeroed = substitute(sq, {{"a_1_1", Rational(0)}});
    CHECK(zeroed.K.size() == 3);  // support shrank: downstream support check must fail
    auto fs = substitute(kernel_from_polytope(catalog_polytope("simplex(1,2)")),
                         {{"a_2", Rational(1, 4)}});
    CHECK(fs.K == fubini_study_kernel(1, 2).K);
}
