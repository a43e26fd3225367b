#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "toric/json_io.hpp"

using namespace toric;

namespace {

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

TEST_CASE("polytope round trip") {
    auto p = catalog_polytope("alz2d");
    Json j = json_of(p);
    Polytope q = polytope_from_json(j);
    CHECK(q.dim() == p.dim());
    CHECK(json_of(q) == j);
    CHECK(q.vertices() == p.vertices());
    CHECK(q.lattice_points() == p.lattice_points());
}

TEST_CASE("polytope json rejects malformed input") {
    CHECK_THROWS_AS(polytope_from_json(Json::object()), ParseError);
    Json j = json_of(catalog_polytope("simplex(2,1)"));
    j["halfspaces"][0].erase("offset");
    CHECK_THROWS_AS(polytope_from_json(j), ParseError);
    Json k = json_of(catalog_polytope("simplex(2,1)"));
    k["halfspaces"][0]["normal"][0] = "1";
    CHECK_THROWS_AS(polytope_from_json(k), ParseError);
}

TEST_CASE("poly round trip keeps exact coefficients") {
    Poly p = upoly(3, {{{0, 0, 0}, Rational(7, 3)}, {{2, 1, 0}, Rational(-5, 2)}, {{0, 0, 3}, 4}});
    Poly q = poly_from_json(json_of(p));
    CHECK(q == p);
    CHECK(json_of(q) == json_of(p));

    Json bad = json_of(p);
    bad["terms"][0][0][0] = 300;
    CHECK_THROWS_AS(poly_from_json(bad), ParseError);
    bad = json_of(p);
    bad["nv"] = kMonoCap + 1;
    CHECK_THROWS_AS(poly_from_json(bad), ParseError);
}

TEST_CASE("kernel round trip, symbolic and numeric") {
    auto sym = kernel_from_polytope(catalog_polytope("alz2d"));
    Kernel sym2 = kernel_from_json(json_of(sym));
    CHECK(sym2.n == sym.n);
    CHECK(sym2.unknown_exps == sym.unknown_exps);
    CHECK(sym2.K == sym.K);
    CHECK(sym2.symbolic());

    auto fs = fubini_study_kernel(2, 2);
    Kernel fs2 = kernel_from_json(json_of(fs));
    CHECK(fs2.K == fs.K);
    CHECK_FALSE(fs2.symbolic());

    Json bad = json_of(fs);
    bad["n"] = 3;
    CHECK_THROWS_AS(kernel_from_json(bad), ParseError);
}

TEST_CASE("certificate steps round trip and replay") {
    // positivity contradiction
    auto contradiction = manual_system({"a"}, {upoly(1, {{{1}, 1}, {{0}, -1}}), upoly(1, {{{1}, 1}, {{0}, 1}})});
    auto res = solve_or_refute(contradiction);
    REQUIRE(res.verdict == Verdict::Refuted);
    Certificate parsed = certificate_from_json(json_of(res.certificate));
    CHECK(replay_certificate(contradiction, parsed));

    // interval exclusion with substitution provenance
    auto boxed = manual_system({"a", "b"}, {upoly(2, {{{2, 0}, 1}, {{1, 0}, 1}, {{0, 0}, -6}}),
                                            upoly(2, {{{3, 0}, 1}, {{0, 0}, -9}}),
                                            upoly(2, {{{0, 1}, 1}, {{1, 0}, -1}})});
    auto boxres = solve_or_refute(boxed);
    REQUIRE(boxres.verdict == Verdict::Refuted);
    Certificate boxparsed = certificate_from_json(json_of(boxres.certificate));
    CHECK(replay_certificate(boxed, boxparsed));

    // tampering with a serialized multiplier must break replay
    Json j = json_of(res.certificate);
    for (auto& step : j)
        if (step["type"] == "positivity_contradiction")
            for (auto& m : step["multipliers"]) m[1] = "0/1";
    CHECK_FALSE(replay_certificate(contradiction, certificate_from_json(j)));
}

TEST_CASE("certify report artifact round trips and replays") {
    auto p = catalog_polytope("alz2d");
    SolveOptions opts;
    auto report = certify(p, opts);
    REQUIRE(report.verdict == Verdict::Refuted);

    Json artifact = certify_report_json(p, opts, report);
    ParsedReport parsed = certify_report_from_json(artifact);
    CHECK(parsed.report.verdict == report.verdict);
    CHECK(parsed.report.sigma_runs.size() == report.sigma_runs.size());
    CHECK(parsed.options.seed == opts.seed);
    CHECK(certify_report_json(parsed.polytope, parsed.options, parsed.report) == artifact);
    CHECK(verify_report(parsed.polytope, parsed.report));
}

TEST_CASE("solved report artifact round trips") {
    auto p = catalog_polytope("simplex(1,1)*simplex(1,1)");
    SolveOptions opts;
    auto report = certify(p, opts);
    REQUIRE(report.verdict == Verdict::Solved);
    Json artifact = certify_report_json(p, opts, report);
    ParsedReport parsed = certify_report_from_json(artifact);
    CHECK(parsed.report.best.assignment.at("a_1_1") == 1);
    CHECK(parsed.report.best.lambda == 4);
    CHECK(verify_report(parsed.polytope, parsed.report));
}

TEST_CASE("fixed seed means byte-identical artifacts") {
    auto p = catalog_polytope("alz2d");
    SolveOptions opts;
    opts.seed = 7;
    std::string a = certify_report_json(p, opts, certify(p, opts)).dump(2);
    std::string b = certify_report_json(p, opts, certify(p, opts)).dump(2);
    CHECK(a == b);
}

TEST_CASE("solve options round trip") {
    SolveOptions opts;
    opts.budget_units = 123456789;
    opts.a_max = Rational(17, 4);
    opts.seed = 0xFFFFFFFFFFFFFFFFULL;
    opts.newton_starts = 3;
    SolveOptions parsed = solve_options_from_json(json_of(opts));
    CHECK(parsed.budget_units == opts.budget_units);
    CHECK(parsed.a_max == opts.a_max);
    CHECK(parsed.seed == opts.seed);
    CHECK(parsed.newton_starts == opts.newton_starts);
    CHECK(json_of(parsed) == json_of(opts));
}

TEST_CASE("catalog row round trip") {
    auto row = verify_product({2, 1}, 2);
    Json j = json_of(row);
    CatalogRow parsed = catalog_row_from_json(j);
    CHECK(parsed.manifold == row.manifold);
    CHECK(parsed.c == row.c);
    CHECK(parsed.sigma == row.sigma);
    CHECK(parsed.lambda == row.lambda);
    CHECK(parsed.embedding_n == row.embedding_n);
    CHECK(parsed.matches_lcm_rule == row.matches_lcm_rule);
    CHECK(json_of(parsed) == j);
}

TEST_CASE("verdict names reject junk") {
    CHECK(verdict_from_name("solved") == Verdict::Solved);
    CHECK(verdict_from_name("refuted") == Verdict::Refuted);
    CHECK(verdict_from_name("unknown") == Verdict::Unknown);
    CHECK_THROWS_AS(verdict_from_name("maybe"), ParseError);
}
