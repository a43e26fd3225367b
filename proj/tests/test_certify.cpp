#include <catch2/catch_amalgamated.hpp>

#include "toric/certify.hpp"

using namespace toric;

namespace {

// hand-built system over named unknowns; x-monomials only order the equations
PolySystem manual_system(std::vector<std::string> names, std::vector<Poly> eqs) {
    PolySystem s;
    s.n = 1;
    s.sigma = 0;
    s.lambda = lambda_for_sigma(1, 0);
    s.unknowns = std::move(names);
    for (int i = 0; i < static_cast<int>(eqs.size()); ++i) {
        Equation e;
        e.xm = mono_var(0, i + 1);
        e.xdeg = i + 1;
        e.lhs = std::move(eqs[static_cast<std::size_t>(i)]);
        s.equations.push_back(std::move(e));
    }
    return s;
}

Poly upoly(int nv, const std::vector<std::pair<std::vector<int>, Rational>>& terms) {
    Poly p(nv);
    for (const auto& [e, c] : terms) {
        Mono m{};
        for (int j = 0; j < nv; ++j) m[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(e[static_cast<std::size_t>(j)]);
        p += Poly::monomial(nv, m, c);
    }
    return p;
}

}  // namespace

TEST_CASE("build_system shapes") {
    auto square = catalog_polytope("simplex(1,1)*simplex(1,1)");
    PolySystem s = build_system(square, 2);
    REQUIRE(s.unknowns == std::vector<std::string>{"a_1_1"});
    CHECK(!s.equations.empty());
    CHECK(s.lambda == 4);

    PolySystem trivial = build_system(catalog_polytope("simplex(2,1)"), 1);
    CHECK(trivial.num_unknowns() == 0);
    CHECK(trivial.equations.empty());

    SystemBuilder hex(catalog_polytope("alz2d"));
    for (int sigma = 0; sigma <= 3; ++sigma) {
        PolySystem hs = hex.system_for(sigma);
        CHECK(hs.num_unknowns() == 4);
        CHECK(hs.equations.size() >= 8);
        // equations are sorted by x-monomial degree
        for (std::size_t i = 1; i < hs.equations.size(); ++i)
            CHECK(hs.equations[i - 1].xdeg <= hs.equations[i].xdeg);
    }

    CHECK_THROWS_AS(build_system(square, 4), Error);
    CHECK_THROWS_AS(build_system(square, -1), Error);
}

TEST_CASE("square system solves to the product kernel") {
    auto square = catalog_polytope("simplex(1,1)*simplex(1,1)");
    SystemBuilder sb(square);
    CertificationResult r = solve_or_refute(sb.system_for(2), {}, &sb.kernel);
    REQUIRE(r.verdict == Verdict::Solved);
    CHECK(r.assignment.at("a_1_1") == 1);
    CHECK(r.lambda == 4);
    CHECK(r.positivity_sampled);
    CHECK(r.positivity_ok);
}

TEST_CASE("opposing linear equations refute") {
    Poly a = Poly::variable(1, 0);
    PolySystem s = manual_system({"a"}, {a - Poly::constant(1, 1), a + Poly::constant(1, 1)});
    CertificationResult r = solve_or_refute(s);
    REQUIRE(r.verdict == Verdict::Refuted);
    bool has_positivity = false;
    for (const auto& step : r.certificate) has_positivity = has_positivity || std::holds_alternative<PositivityContradiction>(step);
    CHECK(has_positivity);
    CHECK(replay_certificate(s, r.certificate));
}

TEST_CASE("nonpositive forced value refutes") {
    // a + 2 = 0 forces a = -2 < 0
    Poly a = Poly::variable(1, 0);
    PolySystem s = manual_system({"a"}, {a + Poly::constant(1, 2)});
    CertificationResult r = solve_or_refute(s);
    REQUIRE(r.verdict == Verdict::Refuted);
    CHECK(replay_certificate(s, r.certificate));
}

TEST_CASE("back substituted nonpositive value refutes via retry") {
    // b - a = 0 and a + b - 0 = 0 force a = b = 0, violating positivity;
    // the first elimination hides the contradiction until the retry keeps b
    Poly a = upoly(2, {{{1, 0}, 1}});
    Poly b = upoly(2, {{{0, 1}, 1}});
    PolySystem s;
    s.n = 1;
    s.sigma = 0;
    s.lambda = 4;
    s.unknowns = {"a", "b"};
    Equation e1{mono_var(0, 1), 1, b - a};
    Equation e2{mono_var(0, 2), 2, a + b};
    s.equations = {e1, e2};
    CertificationResult r = solve_or_refute(s);
    REQUIRE(r.verdict == Verdict::Refuted);
    CHECK(replay_certificate(s, r.certificate));
}

TEST_CASE("pair combination refutes a nonlinear system") {
    // a^2 - b^2 - 1 and b^2 - a^2 sum to -1
    Poly e1 = upoly(2, {{{2, 0}, 1}, {{0, 2}, -1}, {{0, 0}, -1}});
    Poly e2 = upoly(2, {{{0, 2}, 1}, {{2, 0}, -1}});
    PolySystem s;
    s.n = 1;
    s.sigma = 0;
    s.lambda = 4;
    s.unknowns = {"a", "b"};
    s.equations = {Equation{mono_var(0, 1), 1, e1}, Equation{mono_var(0, 2), 2, e2}};
    CertificationResult r = solve_or_refute(s);
    REQUIRE(r.verdict == Verdict::Refuted);
    CHECK(replay_certificate(s, r.certificate));
}

TEST_CASE("triple combination refutes") {
    Poly e1 = upoly(3, {{{2, 0, 0}, 1}, {{0, 2, 0}, -1}});
    Poly e2 = upoly(3, {{{0, 2, 0}, 1}, {{0, 0, 2}, -1}});
    Poly e3 = upoly(3, {{{0, 0, 2}, 1}, {{2, 0, 0}, -1}, {{0, 0, 0}, -1}});
    PolySystem s;
    s.n = 1;
    s.sigma = 0;
    s.lambda = 4;
    s.unknowns = {"a", "b", "c"};
    s.equations = {Equation{mono_var(0, 1), 1, e1}, Equation{mono_var(0, 2), 2, e2}, Equation{mono_var(0, 3), 3, e3}};
    CertificationResult r = solve_or_refute(s);
    REQUIRE(r.verdict == Verdict::Refuted);
    CHECK(replay_certificate(s, r.certificate));
}

TEST_CASE("newton stage recovers nonlinear roots exactly") {
    // a*b = 1/9, a = b has the unique positive solution a = b = 1/3
    Poly e1 = upoly(2, {{{1, 1}, 1}, {{0, 0}, Rational(-1, 9)}});
    Poly e2 = upoly(2, {{{1, 0}, 1}, {{0, 1}, -1}});
    PolySystem s;
    s.n = 1;
    s.sigma = 0;
    s.lambda = 4;
    s.unknowns = {"a", "b"};
    s.equations = {Equation{mono_var(0, 1), 1, e1}, Equation{mono_var(0, 2), 2, e2}};
    CertificationResult r = solve_or_refute(s);
    REQUIRE(r.verdict == Verdict::Solved);
    CHECK(r.assignment.at("a") == Rational(1, 3));
    CHECK(r.assignment.at("b") == Rational(1, 3));
}

TEST_CASE("interval stage refutes incompatible nonlinear equations") {
    // a^2 + a - 6 = 0 pins a = 2; a^3 - 9 = 0 wants a = 9^(1/3)
    Poly e1 = upoly(1, {{{2}, 1}, {{1}, 1}, {{0}, -6}});
    Poly e2 = upoly(1, {{{3}, 1}, {{0}, -9}});
    PolySystem s = manual_system({"a"}, {e1, e2});
    CertificationResult r = solve_or_refute(s);
    REQUIRE(r.verdict == Verdict::Refuted);
    bool has_interval = false;
    for (const auto& step : r.certificate) has_interval = has_interval || std::holds_alternative<IntervalExclusion>(step);
    CHECK(has_interval);
    CHECK(replay_certificate(s, r.certificate));
}

TEST_CASE("oversized derived bound yields unknown instead of a clamped box") {
    // only available bound is a <= 10^10, far beyond the default gate; a
    // clamped box would wrongly exclude the true root a = 10^5
    Poly e1 = upoly(1, {{{2}, 1}, {{0}, Rational(-10000000000LL)}});
    PolySystem s = manual_system({"a"}, {e1});
    SolveOptions opts;
    opts.newton_starts = 0;  // isolate the branch-and-bound path
    CertificationResult r = solve_or_refute(s, opts);
    CHECK(r.verdict == Verdict::Unknown);
    CHECK(r.reason == "undecided");
    // newton proposes the root and exact arithmetic accepts it
    CertificationResult solved = solve_or_refute(s);
    REQUIRE(solved.verdict == Verdict::Solved);
    CHECK(solved.assignment.at("a") == 100000);
}

TEST_CASE("budget exhaustion reports unknown") {
    Poly e1 = upoly(2, {{{2, 1}, 1}, {{0, 2}, -1}, {{0, 0}, -1}});
    Poly e2 = upoly(2, {{{1, 2}, 1}, {{2, 0}, -1}, {{0, 0}, 1}});
    PolySystem s;
    s.n = 1;
    s.sigma = 0;
    s.lambda = 4;
    s.unknowns = {"a", "b"};
    s.equations = {Equation{mono_var(0, 1), 1, e1}, Equation{mono_var(0, 2), 2, e2}};
    SolveOptions opts;
    opts.budget_units = 1;
    CertificationResult r = solve_or_refute(s, opts);
    CHECK(r.verdict == Verdict::Unknown);
    CHECK(r.reason == "budget exhausted");
}

TEST_CASE("oversized systems are gated to unknown") {
    PolySystem s;
    s.n = 2;
    s.sigma = 0;
    s.lambda = 8;
    for (int i = 0; i < 40; ++i) s.unknowns.push_back("a_" + std::to_string(i));
    CertificationResult r = solve_or_refute(s);
    CHECK(r.verdict == Verdict::Unknown);
    CHECK(r.reason == "system too large");
}

TEST_CASE("replay rejects tampering and vacuous certificates") {
    auto hex = catalog_polytope("alz2d");
    SystemBuilder sb(hex);
    PolySystem s0 = sb.system_for(0);
    CertificationResult r = solve_or_refute(s0, {}, &sb.kernel);
    REQUIRE(r.verdict == Verdict::Refuted);
    REQUIRE(replay_certificate(s0, r.certificate));

    Certificate tampered = r.certificate;
    for (auto& step : tampered)
        if (auto* pc = std::get_if<PositivityContradiction>(&step))
            for (auto& [e, mu] : pc->multipliers) mu = 0;
    CHECK(!replay_certificate(s0, tampered));

    // certificates prove refutation only: an empty one never validates
    PolySystem satisfied = build_system(catalog_polytope("simplex(2,1)"), 1);
    CHECK(!replay_certificate(satisfied, {}));

    // substitute steps are checked against the live system
    Certificate wrong = r.certificate;
    bool has_subst = false;
    for (auto& step : wrong)
        if (auto* sl = std::get_if<SubstituteLinear>(&step)) {
            sl->coeff += 1;
            has_subst = true;
            break;
        }
    if (has_subst) CHECK(!replay_certificate(s0, wrong));

    // structural damage throws instead of returning false
    Certificate broken = r.certificate;
    for (auto& step : broken)
        if (auto* pc = std::get_if<PositivityContradiction>(&step))
            for (auto& [e, mu] : pc->multipliers) e = 9999;
    CHECK_THROWS_AS(replay_certificate(s0, broken), MalformedCertificate);
}

TEST_CASE("hexagon refuted for every admissible exponent") {
    auto hex = catalog_polytope("alz2d");
    SystemBuilder sb(hex);
    for (int sigma = 0; sigma <= 3; ++sigma) {
        PolySystem s = sb.system_for(sigma);
        CertificationResult r = solve_or_refute(s, {}, &sb.kernel);
        INFO("sigma = " << sigma);
        REQUIRE(r.verdict == Verdict::Refuted);
        CHECK(replay_certificate(s, r.certificate));
    }
}

TEST_CASE("certify simplexes and the square") {
    for (int n = 1; n <= 3; ++n) {
        CertifyReport rep = certify(catalog_polytope("simplex(" + std::to_string(n) + ",1)"));
        REQUIRE(rep.verdict == Verdict::Solved);
        CHECK(rep.best.sigma == n - 1);
        CHECK(rep.best.lambda == 2 * (n + 1));
    }
    CertifyReport sq = certify(catalog_polytope("simplex(1,1)*simplex(1,1)"));
    REQUIRE(sq.verdict == Verdict::Solved);
    CHECK(sq.best.sigma == 2);
    CHECK(sq.best.lambda == 4);
    CHECK(sq.best.assignment.at("a_1_1") == 1);
    CHECK(verify_report(catalog_polytope("simplex(1,1)*simplex(1,1)"), sq));
}

TEST_CASE("certify hexagon refutes overall") {
    auto hex = catalog_polytope("alz2d");
    CertifyReport rep = certify(hex);
    REQUIRE(rep.verdict == Verdict::Refuted);
    REQUIRE(rep.sigma_runs.size() == 4);
    for (const auto& run : rep.sigma_runs) CHECK(run.result.verdict == Verdict::Refuted);
    CHECK(rep.probes.empty());  // vertex gcd is 1
    bool exhausted = false;
    for (const auto& step : rep.best.certificate) exhausted = exhausted || std::holds_alternative<SigmaExhausted>(step);
    CHECK(exhausted);
    CHECK(verify_report(hex, rep));
}

TEST_CASE("scaled simplex solves through the divisor probe") {
    auto p2 = scale(catalog_polytope("simplex(2,1)"), 2);
    CertifyReport rep = certify(p2);
    REQUIRE(rep.verdict == Verdict::Solved);
    CHECK(rep.best.lambda == 3);
    CHECK(rep.best.sigma == Rational(5, 2));
    // the lifted kernel is (1 + x/2 + y/2)^2
    CHECK(rep.best.assignment.at("a_1_1") == Rational(1, 2));
    CHECK(rep.best.assignment.at("a_2_0") == Rational(1, 4));
    CHECK(rep.best.assignment.at("a_0_2") == Rational(1, 4));
    CHECK(rep.best.positivity_ok);
    CHECK(verify_report(p2, rep));
}

TEST_CASE("third multiple of the simplex keeps the einstein constant") {
    auto p3 = scale(catalog_polytope("simplex(2,1)"), 3);
    CertifyReport rep = certify(p3);
    REQUIRE(rep.verdict == Verdict::Solved);
    CHECK(rep.best.lambda == 2);
    CHECK(verify_report(p3, rep));
}

TEST_CASE("scaled square solves") {
    auto p = scale(catalog_polytope("simplex(1,1)*simplex(1,1)"), 2);
    CertifyReport rep = certify(p);
    REQUIRE(rep.verdict == Verdict::Solved);
    CHECK(rep.best.lambda == 2);
    CHECK(verify_report(p, rep));
}

TEST_CASE("scaled hexagon is never solved") {
    auto p = scale(catalog_polytope("alz2d"), 2);
    CertifyReport rep = certify(p);
    CHECK(rep.verdict != Verdict::Solved);
    // the divisor-2 probe replays the hexagon refutation
    REQUIRE(rep.probes.size() == 1);
    CHECK(rep.probes[0].divisor == 2);
    CHECK(rep.probes[0].verdict == Verdict::Refuted);
    CHECK(verify_report(p, rep));
}

TEST_CASE("large kernels solve via probes despite the system gate") {
    // 7*simplex(2,1) has 33 unknowns, beyond the direct-solver gate, but the
    // divisor-7 probe lifts the Fubini-Study solution
    auto p = scale(catalog_polytope("simplex(2,1)"), 7);
    CertifyReport rep = certify(p);
    REQUIRE(rep.verdict == Verdict::Solved);
    CHECK(rep.best.lambda == Rational(6, 7));
    for (const auto& run : rep.sigma_runs) {
        CHECK(run.result.verdict == Verdict::Unknown);
        CHECK(run.result.reason == "system too large");
    }
}

TEST_CASE("certify requires a delzant polytope") {
    std::vector<HalfSpace> hs(3);
    hs[0].normal = {-1, 0};
    hs[0].offset = 0;
    hs[1].normal = {0, -1};
    hs[1].offset = 0;
    hs[2].normal = {1, 2};
    hs[2].offset = 2;
    Polytope bad(2, std::move(hs));
    CHECK_THROWS_AS(certify(bad), NotDelzant);
}

TEST_CASE("solved results are deterministic across runs") {
    auto p = scale(catalog_polytope("simplex(1,1)*simplex(1,1)"), 2);
    CertifyReport a = certify(p);
    CertifyReport b = certify(p);
    REQUIRE(a.verdict == Verdict::Solved);
    REQUIRE(b.verdict == Verdict::Solved);
    CHECK(a.best.sigma == b.best.sigma);
    CHECK(a.best.assignment == b.best.assignment);
}
