#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "toric/catalog.hpp"
#include "toric/certify.hpp"
#include "toric/json_io.hpp"
#include "toric/moment.hpp"

using namespace toric;

namespace {

int thread_cap() {
    const char* env = std::getenv("TORIC_KE_THREADS");
    if (!env) return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    try {
        int v = std::stoi(env);
        if (v < 1) throw Error("TORIC_KE_THREADS must be a positive integer");
        return v;
    } catch (const std::invalid_argument&) {
        throw Error("TORIC_KE_THREADS must be a positive integer");
    }
}

// Runs f(i) for i in [0, count) on up to thread_cap() workers, each result
// into its own slot, so the output order never depends on scheduling.
template <typename T, typename F>
std::vector<T> parallel_map(int count, F f) {
    std::vector<T> out(static_cast<std::size_t>(count));
    int workers = std::min(thread_cap(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = f(i);
        return out;
    }
    std::vector<std::future<void>> jobs;
    for (int w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (int i = w; i < count; i += workers) out[static_cast<std::size_t>(i)] = f(i);
        }));
    }
    for (auto& j : jobs) j.get();
    return out;
}

Json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

Polytope load_polytope(const std::string& arg) {
    if (arg.rfind("catalog:", 0) == 0) return catalog_polytope(arg.substr(8));
    return polytope_from_json(parse_json_file(arg));
}

Kernel parse_fs_name(const std::string& name) {
    if (name.rfind("fs(", 0) == 0 && name.back() == ')') {
        std::string body = name.substr(3, name.size() - 4);
        auto comma = body.find(',');
        if (comma != std::string::npos) {
            try {
                int n = std::stoi(body.substr(0, comma));
                int c = std::stoi(body.substr(comma + 1));
                return fubini_study_kernel(n, c);
            } catch (const std::invalid_argument&) {
                throw UnknownCatalogName(name);
            }
        }
        throw UnknownCatalogName(name);
    }
    // fall back to the polytope catalog; symbolic kernels are rejected later
    // by the operations that need numbers
    return kernel_from_polytope(catalog_polytope(name));
}

Kernel load_kernel(const std::string& arg) {
    if (arg.rfind("catalog:", 0) == 0) {
        std::string trimmed;
        for (char ch : arg.substr(8))
            if (ch != ' ') trimmed += ch;
        std::vector<std::string> parts;
        int depth = 0;
        std::string cur;
        for (char ch : trimmed) {
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
        Kernel k = parse_fs_name(parts[0]);
        for (std::size_t i = 1; i < parts.size(); ++i) k = product_kernel(k, parse_fs_name(parts[i]));
        return k;
    }
    return kernel_from_json(parse_json_file(arg));
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

std::string join_vec(const std::vector<long long>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

std::string qvec_str(const QVec& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += rat_to_string(v[i]);
    }
    return s + ")";
}

int run_polytope(const std::string& action, const std::string& spec, bool as_json) {
    Polytope p = load_polytope(spec);
    if (action == "lattice") {
        auto pts = p.lattice_points();
        if (as_json) {
            Json j = pts;
            std::cout << j.dump(2) << "\n";
        } else {
            for (const auto& pt : pts) {
                for (std::size_t i = 0; i < pt.size(); ++i) std::cout << (i ? " " : "") << pt[i];
                std::cout << "\n";
            }
            std::cerr << "lattice points: " << pts.size() << "\n";
        }
        return 0;
    }
    if (action == "check-delzant") {
        auto rep = p.is_delzant();
        if (as_json) {
            Json j;
            j["delzant"] = rep.ok;
            j["reason"] = rep.reason;
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << "delzant: " << (rep.ok ? "yes" : "no");
            if (!rep.ok) std::cout << " (" << rep.reason << ", vertex " << qvec_str(rep.bad_vertex) << ")";
            std::cout << "\n";
        }
        return rep.ok ? 0 : 1;
    }
    if (action == "normalize") {
        auto [q, map] = p.normalize_to_origin(p.vertices().front());
        if (as_json) {
            Json j;
            j["polytope"] = json_of(q);
            Json jm;
            jm["a"] = map.A;
            Json t = Json::array();
            for (const auto& c : map.t) t.push_back(rat_to_string(c));
            jm["t"] = std::move(t);
            j["map"] = std::move(jm);
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << "normalized polytope (vertex " << qvec_str(map.t) << " -> origin):\n";
            for (const auto& h : q.halfspaces())
                std::cout << "  " << join_vec(h.normal) << " . x <= " << rat_to_string(h.offset) << "\n";
        }
        return 0;
    }
    // inspect
    auto rep = p.is_delzant();
    auto pts = p.lattice_points();
    if (as_json) {
        Json j = json_of(p);
        Json verts = Json::array();
        for (const auto& v : p.vertices()) {
            Json jv = Json::array();
            for (const auto& c : v) jv.push_back(rat_to_string(c));
            verts.push_back(std::move(jv));
        }
        j["vertices"] = std::move(verts);
        j["lattice_points"] = pts;
        j["delzant"] = rep.ok;
        j["delzant_reason"] = rep.reason;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "dimension: " << p.dim() << "\n";
        std::cout << "halfspaces: " << p.halfspaces().size() << "\n";
        std::cout << "vertices:";
        for (const auto& v : p.vertices()) std::cout << " " << qvec_str(v);
        std::cout << "\n";
        std::cout << "lattice points: " << pts.size() << "\n";
        std::cout << "delzant: " << (rep.ok ? "yes" : "no") << (rep.ok ? "" : " (" + rep.reason + ")") << "\n";
    }
    return 0;
}

int run_certify(const std::string& spec, int sigma_override, long long budget_ms, const std::string& amax,
                std::uint64_t seed, const std::string& json_out) {
    Polytope p = load_polytope(spec);
    SolveOptions opts;
    if (budget_ms >= 0) opts.budget_units = budget_ms * 100;
    if (!amax.empty()) opts.a_max = rat_from_string(amax);
    opts.seed = seed;

    CertifyReport report;
    if (sigma_override >= 0) {
        SystemBuilder builder(p);
        PolySystem sys = builder.system_for(sigma_override);
        SigmaRun run;
        run.sigma = sigma_override;
        run.result = solve_or_refute(sys, opts, &builder.kernel);
        report.verdict = run.result.verdict;
        report.best = run.result;
        report.sigma_runs.push_back(std::move(run));
    } else {
        report = certify(p, opts);
    }

    for (const auto& run : report.sigma_runs) {
        std::cerr << "certify: sigma=" << run.sigma << " verdict=" << verdict_name(run.result.verdict);
        if (!run.result.reason.empty()) std::cerr << " reason=" << run.result.reason;
        std::cerr << "\n";
    }
    for (const auto& probe : report.probes)
        std::cerr << "certify: probe divisor=" << probe.divisor << " verdict=" << verdict_name(probe.verdict)
                  << (probe.note.empty() ? "" : " note=" + probe.note) << "\n";

    std::ostream& summary = json_out == "-" ? std::cerr : std::cout;
    summary << "verdict: " << verdict_name(report.verdict) << "\n";
    if (report.verdict == Verdict::Solved) {
        summary << "sigma: " << rat_to_string(report.best.sigma) << "\n";
        summary << "lambda: " << rat_to_string(report.best.lambda) << "\n";
        for (const auto& [name, value] : report.best.assignment)
            summary << "  " << name << " = " << rat_to_string(value) << "\n";
    }

    if (!json_out.empty()) write_text(json_out, certify_report_json(p, opts, report).dump(2) + "\n");

    switch (report.verdict) {
        case Verdict::Solved: return 0;
        case Verdict::Refuted: return 1;
        default: return 2;
    }
}

int run_verify_catalog(int dim, long long q, const std::string& json_out) {
    auto all = projective_product_catalog();
    std::vector<std::vector<int>> picked;
    for (const auto& dims : all) {
        int total = 0;
        for (int n : dims) total += n;
        if (dim == 0 || total == dim) picked.push_back(dims);
    }
    auto rows = parallel_map<CatalogRow>(static_cast<int>(picked.size()),
                                         [&](int i) { return verify_product(picked[static_cast<std::size_t>(i)], q); });

    if (!json_out.empty()) {
        Json j = Json::array();
        for (const auto& row : rows) j.push_back(json_of(row));
        write_text(json_out, j.dump(2) + "\n");
    }
    if (json_out != "-") {
        std::ostringstream table;
        table << std::left << std::setw(28) << "manifold" << std::setw(3) << "q" << std::setw(12) << "c"
              << std::setw(8) << "lambda" << std::setw(7) << "sigma" << std::setw(9) << "residual"
              << std::setw(11) << "positivity" << std::setw(6) << "N" << "\n";
        for (const auto& row : rows) {
            table << std::left << std::setw(28) << row.manifold << std::setw(3) << row.q << std::setw(12)
                  << "(" + join_vec(row.c) + ")" << std::setw(8) << rat_to_string(row.lambda) << std::setw(7)
                  << rat_to_string(row.sigma) << std::setw(9) << (row.residual_zero ? "zero" : "NONZERO")
                  << std::setw(11) << (row.positivity ? "pos" : "NOT-POS") << std::setw(6) << row.embedding_n.str();
            if (!row.matches_lcm_rule) table << " [differs from lcm rule c=(" << join_vec(row.lcm_rule_c) << ")]";
            table << "\n";
        }
        std::cout << table.str();
    }
    bool ok = true;
    for (const auto& row : rows)
        if (!row.residual_zero || !row.positivity) ok = false;
    return ok ? 0 : 1;
}

int run_moment_sample(const std::string& spec, int grid, const std::string& csv_out) {
    Kernel k = load_kernel(spec);
    auto pts = log_grid(k.n, grid);
    auto images = parallel_map<QVec>(static_cast<int>(pts.size()),
                                     [&](int i) { return moment_map(k, pts[static_cast<std::size_t>(i)]); });
    std::ostringstream csv;
    for (int j = 0; j < k.n; ++j) csv << "x_" << j + 1 << ",";
    for (int j = 0; j < k.n; ++j) csv << "mu_" << j + 1 << (j + 1 < k.n ? "," : "\n");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (int j = 0; j < k.n; ++j) csv << rat_to_string(pts[i][static_cast<std::size_t>(j)]) << ",";
        for (int j = 0; j < k.n; ++j)
            csv << rat_to_string(images[i][static_cast<std::size_t>(j)]) << (j + 1 < k.n ? "," : "\n");
    }
    write_text(csv_out.empty() ? "-" : csv_out, csv.str());
    std::cerr << "moment-sample: " << pts.size() << " samples\n";
    return 0;
}

int run_replay(const std::string& path) {
    ParsedReport parsed = certify_report_from_json(parse_json_file(path));
    bool ok = verify_report(parsed.polytope, parsed.report);
    std::cout << "stored verdict: " << verdict_name(parsed.report.verdict) << "\n";
    std::cout << "replay: " << (ok ? "confirmed" : "MISMATCH") << "\n";
    return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact rotation-invariant Kahler-Einstein certifier for Delzant polytopes"};
    app.require_subcommand(1);
    int rc = 0;

    auto* poly = app.add_subcommand("polytope", "inspect a polytope");
    poly->require_subcommand(1);
    std::string poly_spec;
    bool poly_json = false;
    const std::map<std::string, std::string> poly_help = {
        {"inspect", "print half-spaces, vertices, and lattice count"},
        {"check-delzant", "test smoothness at every vertex"},
        {"lattice", "list the lattice points"},
        {"normalize", "move a vertex to the origin by a unimodular map"},
    };
    for (const char* action : {"inspect", "check-delzant", "lattice", "normalize"}) {
        auto* sub = poly->add_subcommand(action, poly_help.at(action));
        sub->add_option("spec", poly_spec, "catalog:NAME or polytope JSON file")->required();
        sub->add_flag("--json", poly_json, "emit JSON to stdout");
        sub->callback([&rc, action, &poly_spec, &poly_json] { rc = run_polytope(action, poly_spec, poly_json); });
    }

    auto* cert = app.add_subcommand("certify", "decide det B(K) = K^sigma over a polytope");
    std::string cert_spec, cert_amax, cert_json;
    int cert_sigma = -1;
    long long cert_budget_ms = -1;
    std::uint64_t cert_seed = SolveOptions{}.seed;
    cert->add_option("spec", cert_spec, "catalog:NAME or polytope JSON file")->required();
    cert->add_option("--sigma", cert_sigma, "single exponent instead of the full scan");
    cert->add_option("--budget-ms", cert_budget_ms, "solver budget in milliseconds (100 work units each)");
    cert->add_option("--amax", cert_amax, "bound gate for branch-and-bound boxes, as a rational");
    cert->add_option("--seed", cert_seed, "seed for the numeric stage");
    cert->add_option("--json", cert_json, "write the report artifact here ('-' for stdout)");
    cert->callback([&] { rc = run_certify(cert_spec, cert_sigma, cert_budget_ms, cert_amax, cert_seed, cert_json); });

    auto* vc = app.add_subcommand("verify-catalog", "check the product-of-projective-spaces table");
    int vc_dim = 0;
    long long vc_q = 1;
    std::string vc_json;
    vc->add_option("--dim", vc_dim, "only products of this total dimension");
    vc->add_option("--q", vc_q, "global metric multiple");
    vc->add_option("--json", vc_json, "write rows as JSON here ('-' for stdout)");
    vc->callback([&] { rc = run_verify_catalog(vc_dim, vc_q, vc_json); });

    auto* ms = app.add_subcommand("moment-sample", "sample the moment map on a log grid");
    std::string ms_spec, ms_csv;
    int ms_grid = 10;
    ms->add_option("kernel", ms_spec, "catalog:fs(n,c)[*fs(...)] or kernel JSON file")->required();
    ms->add_option("--grid", ms_grid, "samples per axis")->check(CLI::PositiveNumber);
    ms->add_option("--csv", ms_csv, "write CSV here (default stdout)");
    ms->callback([&] { rc = run_moment_sample(ms_spec, ms_grid, ms_csv); });

    auto* rp = app.add_subcommand("replay", "re-check a certify artifact");
    std::string rp_path;
    rp->add_option("artifact", rp_path, "certify JSON artifact")->required();
    rp->callback([&] { rc = run_replay(rp_path); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 64;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return rc;
}
