#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "toric/catalog.hpp"
#include "toric/certify.hpp"
#include "toric/kernel.hpp"
#include "toric/polytope.hpp"

namespace toric {

// nlohmann's map-backed json keeps keys sorted; together with the
// everything-as-exact-rational policy this makes artifacts byte-stable for a
// fixed input and seed.
using Json = nlohmann::json;

namespace detail {

inline const Json& field(const Json& j, const char* key) {
    auto it = j.find(key);
    if (!j.is_object() || it == j.end()) throw ParseError(std::string("missing field: ") + key);
    return *it;
}

inline long long int_field(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_number_integer()) throw ParseError(std::string("field must be an integer: ") + key);
    return v.get<long long>();
}

inline bool bool_field(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_boolean()) throw ParseError(std::string("field must be a boolean: ") + key);
    return v.get<bool>();
}

inline std::string string_field(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_string()) throw ParseError(std::string("field must be a string: ") + key);
    return v.get<std::string>();
}

inline Rational rational_field(const Json& j, const char* key) {
    return rat_from_string(string_field(j, key));
}

}  // namespace detail

inline Verdict verdict_from_name(const std::string& s) {
    if (s == "solved") return Verdict::Solved;
    if (s == "refuted") return Verdict::Refuted;
    if (s == "unknown") return Verdict::Unknown;
    throw ParseError("unknown verdict: " + s);
}

inline Json json_of(const Polytope& p) {
    Json rows = Json::array();
    for (const auto& h : p.halfspaces()) {
        Json row;
        row["normal"] = h.normal;
        row["offset"] = rat_to_string(h.offset);
        rows.push_back(std::move(row));
    }
    Json j;
    j["dim"] = p.dim();
    j["halfspaces"] = std::move(rows);
    return j;
}

inline Polytope polytope_from_json(const Json& j) {
    int n = static_cast<int>(detail::int_field(j, "dim"));
    const Json& rows = detail::field(j, "halfspaces");
    if (!rows.is_array()) throw ParseError("halfspaces must be an array");
    std::vector<HalfSpace> hs;
    for (const auto& row : rows) {
        const Json& normal = detail::field(row, "normal");
        if (!normal.is_array()) throw ParseError("normal must be an array");
        HalfSpace h;
        for (const auto& v : normal) {
            if (!v.is_number_integer()) throw ParseError("normal entries must be integers");
            h.normal.push_back(v.get<long long>());
        }
        h.offset = detail::rational_field(row, "offset");
        hs.push_back(std::move(h));
    }
    return Polytope(n, std::move(hs));
}

inline Json json_of(const Poly& p) {
    Json terms = Json::array();
    for (const auto& [m, c] : p.terms()) {
        Json exps = Json::array();
        for (int v = 0; v < p.nvars(); ++v) exps.push_back(static_cast<int>(m[static_cast<std::size_t>(v)]));
        terms.push_back(Json::array({std::move(exps), rat_to_string(c)}));
    }
    Json j;
    j["nv"] = p.nvars();
    j["terms"] = std::move(terms);
    return j;
}

inline Poly poly_from_json(const Json& j) {
    int nv = static_cast<int>(detail::int_field(j, "nv"));
    if (nv < 0 || nv > kMonoCap) throw ParseError("variable count out of range");
    const Json& terms = detail::field(j, "terms");
    if (!terms.is_array()) throw ParseError("terms must be an array");
    Poly out(nv);
    for (const auto& t : terms) {
        if (!t.is_array() || t.size() != 2 || !t[0].is_array() || !t[1].is_string())
            throw ParseError("each term must be [exponents, coefficient]");
        if (static_cast<int>(t[0].size()) != nv) throw ParseError("exponent arity mismatch");
        Mono m{};
        for (int v = 0; v < nv; ++v) {
            if (!t[0][static_cast<std::size_t>(v)].is_number_integer()) throw ParseError("exponents must be integers");
            long long e = t[0][static_cast<std::size_t>(v)].get<long long>();
            if (e < 0 || e > 255) throw ParseError("exponent out of range");
            m[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(e);
        }
        out += Poly::monomial(nv, m, rat_from_string(t[1].get<std::string>()));
    }
    return out;
}

inline Json json_of(const Kernel& k) {
    Json j;
    j["n"] = k.n;
    j["unknown_exps"] = k.unknown_exps;
    j["k"] = json_of(k.K);
    return j;
}

inline Kernel kernel_from_json(const Json& j) {
    Kernel k;
    k.n = static_cast<int>(detail::int_field(j, "n"));
    if (k.n < 1) throw ParseError("kernel arity must be positive");
    const Json& exps = detail::field(j, "unknown_exps");
    if (!exps.is_array()) throw ParseError("unknown_exps must be an array");
    for (const auto& e : exps) {
        if (!e.is_array() || static_cast<int>(e.size()) != k.n) throw ParseError("unknown exponent arity mismatch");
        std::vector<long long> v;
        for (const auto& c : e) {
            if (!c.is_number_integer()) throw ParseError("exponents must be integers");
            v.push_back(c.get<long long>());
        }
        k.unknown_exps.push_back(std::move(v));
    }
    k.K = poly_from_json(detail::field(j, "k"));
    if (k.K.nvars() != k.nvars()) throw ParseError("kernel polynomial arity mismatch");
    return k;
}

inline Json json_of(const CertStep& step) {
    Json j;
    if (const auto* s = std::get_if<SubstituteLinear>(&step)) {
        j["type"] = "substitute_linear";
        j["equation"] = s->equation;
        j["unknown"] = s->unknown;
        j["coeff"] = rat_to_string(s->coeff);
        j["expr"] = json_of(s->expr);
    } else if (const auto* s = std::get_if<PositivityContradiction>(&step)) {
        j["type"] = "positivity_contradiction";
        Json muls = Json::array();
        for (const auto& [eq, c] : s->multipliers) muls.push_back(Json::array({eq, rat_to_string(c)}));
        j["multipliers"] = std::move(muls);
    } else if (const auto* s = std::get_if<IntervalExclusion>(&step)) {
        j["type"] = "interval_exclusion";
        j["unknowns"] = s->unknowns;
        Json bounds = Json::array();
        for (const auto& b : s->bounds) {
            Json jb;
            jb["unknown"] = b.unknown;
            jb["equation"] = b.equation;
            jb["degree"] = b.degree;
            jb["coeff"] = rat_to_string(b.coeff);
            jb["constant"] = rat_to_string(b.constant);
            jb["bound"] = rat_to_string(b.bound);
            bounds.push_back(std::move(jb));
        }
        j["bounds"] = std::move(bounds);
        Json tree = Json::array();
        for (const auto& node : s->tree) {
            Json jn;
            jn["exclude_equation"] = node.exclude_equation;
            jn["split_dim"] = node.split_dim;
            jn["split_at"] = rat_to_string(node.split_at);
            jn["lo"] = node.lo;
            jn["hi"] = node.hi;
            tree.push_back(std::move(jn));
        }
        j["tree"] = std::move(tree);
    } else {
        const auto& ex = std::get<SigmaExhausted>(step);
        j["type"] = "sigma_exhausted";
        j["sigma_min"] = ex.sigma_min;
        j["sigma_max"] = ex.sigma_max;
        j["probe_divisors"] = ex.probe_divisors;
    }
    return j;
}

inline CertStep cert_step_from_json(const Json& j) {
    std::string type = detail::string_field(j, "type");
    if (type == "substitute_linear") {
        SubstituteLinear s;
        s.equation = static_cast<int>(detail::int_field(j, "equation"));
        s.unknown = static_cast<int>(detail::int_field(j, "unknown"));
        s.coeff = detail::rational_field(j, "coeff");
        s.expr = poly_from_json(detail::field(j, "expr"));
        return s;
    }
    if (type == "positivity_contradiction") {
        PositivityContradiction s;
        const Json& muls = detail::field(j, "multipliers");
        if (!muls.is_array()) throw ParseError("multipliers must be an array");
        for (const auto& m : muls) {
            if (!m.is_array() || m.size() != 2 || !m[0].is_number_integer() || !m[1].is_string())
                throw ParseError("each multiplier must be [equation, rational]");
            s.multipliers.emplace_back(m[0].get<int>(), rat_from_string(m[1].get<std::string>()));
        }
        return s;
    }
    if (type == "interval_exclusion") {
        IntervalExclusion s;
        const Json& unknowns = detail::field(j, "unknowns");
        if (!unknowns.is_array()) throw ParseError("unknowns must be an array");
        for (const auto& u : unknowns) s.unknowns.push_back(u.get<int>());
        for (const auto& jb : detail::field(j, "bounds")) {
            BoundProvenance b;
            b.unknown = static_cast<int>(detail::int_field(jb, "unknown"));
            b.equation = static_cast<int>(detail::int_field(jb, "equation"));
            b.degree = static_cast<int>(detail::int_field(jb, "degree"));
            b.coeff = detail::rational_field(jb, "coeff");
            b.constant = detail::rational_field(jb, "constant");
            b.bound = detail::rational_field(jb, "bound");
            s.bounds.push_back(std::move(b));
        }
        for (const auto& jn : detail::field(j, "tree")) {
            BoxNode node;
            node.exclude_equation = static_cast<int>(detail::int_field(jn, "exclude_equation"));
            node.split_dim = static_cast<int>(detail::int_field(jn, "split_dim"));
            node.split_at = detail::rational_field(jn, "split_at");
            node.lo = static_cast<int>(detail::int_field(jn, "lo"));
            node.hi = static_cast<int>(detail::int_field(jn, "hi"));
            s.tree.push_back(std::move(node));
        }
        return s;
    }
    if (type == "sigma_exhausted") {
        SigmaExhausted s;
        s.sigma_min = static_cast<int>(detail::int_field(j, "sigma_min"));
        s.sigma_max = static_cast<int>(detail::int_field(j, "sigma_max"));
        for (const auto& d : detail::field(j, "probe_divisors")) s.probe_divisors.push_back(d.get<int>());
        return s;
    }
    throw ParseError("unknown certificate step type: " + type);
}

inline Json json_of(const Certificate& cert) {
    Json j = Json::array();
    for (const auto& step : cert) j.push_back(json_of(step));
    return j;
}

inline Certificate certificate_from_json(const Json& j) {
    if (!j.is_array()) throw ParseError("certificate must be an array");
    Certificate cert;
    for (const auto& step : j) cert.push_back(cert_step_from_json(step));
    return cert;
}

inline Json json_of(const CertificationResult& r) {
    Json j;
    j["verdict"] = verdict_name(r.verdict);
    j["sigma"] = rat_to_string(r.sigma);
    j["lambda"] = rat_to_string(r.lambda);
    Json assignment;
    for (const auto& [name, value] : r.assignment) assignment[name] = rat_to_string(value);
    j["assignment"] = std::move(assignment);
    j["certificate"] = json_of(r.certificate);
    j["reason"] = r.reason;
    j["positivity_sampled"] = r.positivity_sampled;
    j["positivity_ok"] = r.positivity_ok;
    return j;
}

inline CertificationResult certification_result_from_json(const Json& j) {
    CertificationResult r;
    r.verdict = verdict_from_name(detail::string_field(j, "verdict"));
    r.sigma = detail::rational_field(j, "sigma");
    r.lambda = detail::rational_field(j, "lambda");
    const Json& assignment = detail::field(j, "assignment");
    if (!assignment.is_object() && !assignment.is_null())
        throw ParseError("assignment must be an object");
    if (assignment.is_object())
        for (const auto& [name, value] : assignment.items()) {
            if (!value.is_string()) throw ParseError("assignment values must be rationals");
            r.assignment[name] = rat_from_string(value.get<std::string>());
        }
    r.certificate = certificate_from_json(detail::field(j, "certificate"));
    r.reason = detail::string_field(j, "reason");
    r.positivity_sampled = detail::bool_field(j, "positivity_sampled");
    r.positivity_ok = detail::bool_field(j, "positivity_ok");
    return r;
}

inline Json json_of(const SolveOptions& opts) {
    Json j;
    j["budget_units"] = opts.budget_units;
    j["a_max"] = rat_to_string(opts.a_max);
    j["seed"] = opts.seed;
    j["newton_starts"] = opts.newton_starts;
    j["newton_iters"] = opts.newton_iters;
    j["max_bb_unknowns"] = opts.max_bb_unknowns;
    j["max_system_unknowns"] = opts.max_system_unknowns;
    return j;
}

inline SolveOptions solve_options_from_json(const Json& j) {
    SolveOptions opts;
    opts.budget_units = detail::int_field(j, "budget_units");
    opts.a_max = detail::rational_field(j, "a_max");
    const Json& seed = detail::field(j, "seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) throw ParseError("seed must be an integer");
    opts.seed = seed.get<std::uint64_t>();
    opts.newton_starts = static_cast<int>(detail::int_field(j, "newton_starts"));
    opts.newton_iters = static_cast<int>(detail::int_field(j, "newton_iters"));
    opts.max_bb_unknowns = static_cast<int>(detail::int_field(j, "max_bb_unknowns"));
    opts.max_system_unknowns = static_cast<int>(detail::int_field(j, "max_system_unknowns"));
    return opts;
}

inline Json json_of(const SigmaRun& run) {
    Json j;
    j["sigma"] = run.sigma;
    j["result"] = json_of(run.result);
    return j;
}

inline SigmaRun sigma_run_from_json(const Json& j) {
    SigmaRun run;
    run.sigma = static_cast<int>(detail::int_field(j, "sigma"));
    run.result = certification_result_from_json(detail::field(j, "result"));
    return run;
}

inline Json json_of(const ProbeBranch& probe) {
    Json j;
    j["divisor"] = probe.divisor;
    j["verdict"] = verdict_name(probe.verdict);
    Json runs = Json::array();
    for (const auto& run : probe.runs) runs.push_back(json_of(run));
    j["runs"] = std::move(runs);
    j["note"] = probe.note;
    return j;
}

inline ProbeBranch probe_branch_from_json(const Json& j) {
    ProbeBranch probe;
    probe.divisor = static_cast<int>(detail::int_field(j, "divisor"));
    probe.verdict = verdict_from_name(detail::string_field(j, "verdict"));
    for (const auto& run : detail::field(j, "runs")) probe.runs.push_back(sigma_run_from_json(run));
    probe.note = detail::string_field(j, "note");
    return probe;
}

// Top-level certify artifact: the polytope and options are embedded so a
// replay needs nothing but this file.
inline Json certify_report_json(const Polytope& p, const SolveOptions& opts, const CertifyReport& report) {
    Json j;
    j["polytope"] = json_of(p);
    j["options"] = json_of(opts);
    j["verdict"] = verdict_name(report.verdict);
    j["best"] = json_of(report.best);
    Json runs = Json::array();
    for (const auto& run : report.sigma_runs) runs.push_back(json_of(run));
    j["sigma_runs"] = std::move(runs);
    Json probes = Json::array();
    for (const auto& probe : report.probes) probes.push_back(json_of(probe));
    j["probes"] = std::move(probes);
    return j;
}

struct ParsedReport {
    Polytope polytope;
    SolveOptions options;
    CertifyReport report;
};

inline ParsedReport certify_report_from_json(const Json& j) {
    Polytope p = polytope_from_json(detail::field(j, "polytope"));
    SolveOptions opts = solve_options_from_json(detail::field(j, "options"));
    CertifyReport report;
    report.verdict = verdict_from_name(detail::string_field(j, "verdict"));
    report.best = certification_result_from_json(detail::field(j, "best"));
    for (const auto& run : detail::field(j, "sigma_runs")) report.sigma_runs.push_back(sigma_run_from_json(run));
    for (const auto& probe : detail::field(j, "probes")) report.probes.push_back(probe_branch_from_json(probe));
    return ParsedReport{std::move(p), opts, std::move(report)};
}

inline Json json_of(const CatalogRow& row) {
    Json j;
    j["manifold"] = row.manifold;
    j["dims"] = row.dims;
    j["q"] = row.q;
    j["c"] = row.c;
    j["sigma"] = rat_to_string(row.sigma);
    j["lambda"] = rat_to_string(row.lambda);
    j["residual_zero"] = row.residual_zero;
    j["positivity"] = row.positivity;
    j["embedding_dimension"] = row.embedding_n.str();
    j["lcm_rule_c"] = row.lcm_rule_c;
    j["matches_lcm_rule"] = row.matches_lcm_rule;
    return j;
}

inline CatalogRow catalog_row_from_json(const Json& j) {
    CatalogRow row;
    row.manifold = detail::string_field(j, "manifold");
    for (const auto& d : detail::field(j, "dims")) row.dims.push_back(d.get<int>());
    row.q = detail::int_field(j, "q");
    for (const auto& c : detail::field(j, "c")) row.c.push_back(c.get<long long>());
    row.sigma = detail::rational_field(j, "sigma");
    row.lambda = detail::rational_field(j, "lambda");
    row.residual_zero = detail::bool_field(j, "residual_zero");
    row.positivity = detail::bool_field(j, "positivity");
    row.embedding_n = Integer(detail::string_field(j, "embedding_dimension"));
    for (const auto& c : detail::field(j, "lcm_rule_c")) row.lcm_rule_c.push_back(c.get<long long>());
    row.matches_lcm_rule = detail::bool_field(j, "matches_lcm_rule");
    return row;
}

}  // namespace toric
