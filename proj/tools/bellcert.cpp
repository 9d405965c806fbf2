// Command-line front end: certify observed statistics, scan relaxation
// boundaries, compute polytope ground truth, and export SDP instances.
// JSON in, JSON/CSV out. Exit codes: 0 = nonlocal verdict, 2 = decided
// not-violated or inconclusive, 1 = input error.

#include "bellcert/bellcert.hpp"
#include "bellcert/sdpa_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

using nlohmann::json;
namespace bc = bellcert;

namespace {

constexpr int kFormatVersion = 1;

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream os;
        os << std::cin.rdbuf();
        return os.str();
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bc::Correlators parse_coefficients(const json& j) {
    bc::Correlators c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const int idx = bc::correlator_index(it.key());
        if (idx < 0) throw std::runtime_error("unknown correlator name: " + it.key());
        c[idx] = bc::rational_of(it.value().get<double>());
    }
    return c;
}

std::vector<bc::PointConstraint> parse_constraints(const json& j) {
    std::vector<bc::PointConstraint> cs;
    for (const auto& item : j) {
        bc::PointConstraint c;
        c.coeffs = parse_coefficients(item.at("coefficients"));
        c.value = bc::rational_of(item.at("value").get<double>());
        cs.push_back(std::move(c));
    }
    if (cs.empty()) throw std::runtime_error("at least one constraint is required");
    return cs;
}

json inequality_to_json(const bc::BellInequality& ineq, const std::string& note) {
    json alpha;
    for (int i = 0; i < 5; ++i) alpha[bc::correlator_name(i)] = bc::to_double(ineq.alpha[i]);
    return json{{"alpha", alpha}, {"betaC", bc::to_double(ineq.beta_c)}, {"normalization", note}};
}

bc::LinearFunctional parse_functional(const json& j) {
    bc::LinearFunctional f;
    f.coeffs = parse_coefficients(j);
    return f;
}

int machine_threads() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

int cmd_certify(const std::string& request_path, int mu_override, double tol) {
    json req = json::parse(read_input(request_path));
    const long long n = req.at("N").get<long long>();
    int mu = req.value("mu", 1);
    if (mu_override > 0) mu = mu_override;
    const std::string mode = req.value("mode", "lambda");
    auto cs = parse_constraints(req.at("constraints"));

    bc::EngineOptions opts;
    opts.mu = mu;
    opts.sdp.tol_gap = tol;
    bc::CertifyResult res = mode == "feasibility" ? bc::certify_feasibility(n, cs, opts)
                                                  : bc::certify_lambda(n, cs, opts);

    json rep;
    rep["format_version"] = kFormatVersion;
    rep["N"] = n;
    rep["mu"] = mu;
    rep["mode"] = mode;
    rep["verdict"] = bc::to_string(res.verdict);
    if (res.lambda_max) rep["lambda_max"] = *res.lambda_max;
    if (std::isfinite(res.margin)) rep["margin"] = res.margin;
    if (res.inequality) rep["inequality"] = inequality_to_json(*res.inequality, res.normalization_note);
    rep["solver"] = json{{"status", bc::to_string(res.solver_status)},
                         {"iterations", res.stats.iterations},
                         {"primal_residual", res.stats.primal_residual},
                         {"dual_residual", res.stats.dual_residual},
                         {"gap", res.stats.gap}};
    std::cout << rep.dump(2) << "\n";
    return res.verdict == bc::Verdict::Nonlocal ? 0 : 2;
}

int cmd_scan(long long n, int mu, const std::string& plane_path, int rays, int threads) {
    json plane = json::parse(read_input(plane_path));
    bc::LinearFunctional f1 = parse_functional(plane.at("f1"));
    bc::LinearFunctional f2 = parse_functional(plane.at("f2"));

    bc::ScanOptions opts;
    opts.engine.mu = mu;
    opts.rays = rays;
    opts.threads = threads;
    opts.with_hull = true;
    try {
        bc::check_vertex_budget(n);
    } catch (const bc::BudgetExceeded& e) {
        std::cerr << "warning: " << e.what() << "; omitting r_hull column\n";
        opts.with_hull = false;
    }
    const auto rows = bc::scan_boundary(n, f1, f2, opts);
    if (opts.with_hull)
        std::cout << "theta,lambda_sdp,r_hull\n";
    else
        std::cout << "theta,lambda_sdp\n";
    char buf[96];
    for (const auto& row : rows) {
        if (opts.with_hull) {
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\n", row.theta, row.lambda_sdp,
                          row.r_hull.value_or(std::numeric_limits<double>::quiet_NaN()));
        } else {
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", row.theta, row.lambda_sdp);
        }
        std::cout << buf;
    }
    return 0;
}

int cmd_hull(long long n, const std::string& plane_path) {
    json plane = json::parse(read_input(plane_path));
    bc::LinearFunctional f1 = parse_functional(plane.at("f1"));
    bc::LinearFunctional f2 = parse_functional(plane.at("f2"));
    const auto poly = bc::project_2d(n, f1, f2);
    json verts = json::array();
    for (const auto& p : poly) verts.push_back({bc::to_double(p.u), bc::to_double(p.v)});
    json rep{{"format_version", kFormatVersion}, {"N", n}, {"vertices", verts}};
    std::cout << rep.dump(2) << "\n";
    return 0;
}

int cmd_bound(long long n, const std::string& ineq_path, int threads) {
    json j = json::parse(read_input(ineq_path));
    bc::Correlators alpha = parse_coefficients(j.at("alpha"));
    bc::Rational offset = bc::rational_of(j.value("offset", 0.0));
    if (j.contains("betaC")) offset = bc::rational_of(j.at("betaC").get<double>());
    const bc::BoundReport rep = bc::bound_inequality(alpha, offset, n, threads);
    json out;
    out["format_version"] = kFormatVersion;
    out["N"] = n;
    out["min"] = bc::to_double(rep.minimum);
    out["min_rational"] = rep.minimum.str();
    out["tight"] = rep.tight;
    out["argmin"] = {rep.argmin[0], rep.argmin[1], rep.argmin[2], rep.argmin[3]};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_export(long long n, int mu, const std::string& constraints_path,
               const std::string& out_path) {
    std::vector<bc::PointConstraint> cs;
    bool lambda_mode = false;
    if (!constraints_path.empty()) {
        json j = json::parse(read_input(constraints_path));
        cs = parse_constraints(j.at("constraints"));
        lambda_mode = j.value("mode", "feasibility") == "lambda";
    }
    bc::MomentTemplate tpl = bc::condition_template(bc::build_template(mu, n));
    const bc::SdpProblem p =
        lambda_mode ? bc::assemble_lambda_max(tpl, cs) : bc::assemble_feasibility(tpl, cs);
    const std::string text = bc::export_standard(p);
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << text;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SDP certification of Bell correlations in permutationally invariant statistics"};
    app.require_subcommand(1);

    std::string request_path, plane_path, ineq_path, constraints_path, out_path;
    long long n = 0;
    int mu = 1, rays = 360, threads = machine_threads(), mu_override = 0;
    double tol = 1e-8;

    auto* certify = app.add_subcommand("certify", "decide a statistics point from a request file");
    certify->add_option("request", request_path, "request JSON file ('-' for stdin)")->required();
    certify->add_option("--mu", mu_override, "override the relaxation level");
    certify->add_option("--tol", tol, "SDP duality-gap tolerance");

    auto* scan = app.add_subcommand("scan", "scan the relaxation boundary in a 2D plane");
    scan->add_option("--N", n, "party count")->required();
    scan->add_option("--mu", mu, "relaxation level");
    scan->add_option("--plane", plane_path, "plane JSON file with f1, f2")->required();
    scan->add_option("--rays", rays, "number of rays");
    scan->add_option("--threads", threads, "worker threads");

    auto* hull = app.add_subcommand("hull", "2D projection of the local polytope");
    hull->add_option("--N", n, "party count")->required();
    hull->add_option("--plane", plane_path, "plane JSON file with f1, f2")->required();

    auto* bound = app.add_subcommand("bound", "classical bound of an inequality");
    bound->add_option("--N", n, "party count")->required();
    bound->add_option("--inequality", ineq_path, "inequality JSON file")->required();
    bound->add_option("--threads", threads, "worker threads");

    auto* exp = app.add_subcommand("export", "export the SDP in sparse SDPA format");
    exp->add_option("--N", n, "party count")->required();
    exp->add_option("--mu", mu, "relaxation level");
    exp->add_option("--constraints", constraints_path, "constraints JSON file");
    exp->add_option("--out", out_path, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(certify)) return cmd_certify(request_path, mu_override, tol);
        if (app.got_subcommand(scan)) return cmd_scan(n, mu, plane_path, rays, threads);
        if (app.got_subcommand(hull)) return cmd_hull(n, plane_path);
        if (app.got_subcommand(bound)) return cmd_bound(n, ineq_path, threads);
        if (app.got_subcommand(exp)) return cmd_export(n, mu, constraints_path, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
