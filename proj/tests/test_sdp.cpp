#include "bellcert/sdp.hpp"

#include "bellcert/moment.hpp"
#include "bellcert/sdpa_io.hpp"

#include "catch_amalgamated.hpp"

#include <cstring>
#include <random>

using namespace bellcert;

namespace {

SdpProblem lmi(std::vector<int> sizes, SdpMatrix f0, std::vector<SdpMatrix> vars,
               std::vector<double> obj) {
    SdpProblem p;
    p.block_sizes = std::move(sizes);
    p.constant = std::move(f0);
    p.variables = std::move(vars);
    p.objective = std::move(obj);
    p.var_names.resize(p.variables.size());
    return p;
}

} // namespace

TEST_CASE("solver: analytic optimum of a 2x2 LMI") {
    // maximize -x s.t. [[x, 1], [1, x]] >= 0 : optimum at x = 1, value -1
    SdpMatrix f0{{{{0, 1, 1.0}}}};
    SdpMatrix f1{{{{0, 0, 1.0}, {1, 1, 1.0}}}};
    const SdpProblem p = lmi({2}, f0, {f1}, {-1.0});
    const SdpOutcome o = solve(p);
    REQUIRE(o.status == SdpStatus::Optimal);
    CHECK(o.objective == Catch::Approx(-1.0).margin(1e-7));
    CHECK(o.z[0] == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("solver: two blocks, analytic optimum") {
    // maximize x s.t. x <= 3 (diag block) and [[2, x],[x, 2]] >= 0 : x* = 2
    SdpMatrix f0;
    f0.blocks = {{{0, 0, 3.0}}, {{0, 0, 2.0}, {1, 1, 2.0}}};
    SdpMatrix f1;
    f1.blocks = {{{0, 0, -1.0}}, {{0, 1, 1.0}}};
    const SdpProblem p = lmi({1, 2}, f0, {f1}, {1.0});
    const SdpOutcome o = solve(p);
    REQUIRE(o.status == SdpStatus::Optimal);
    CHECK(o.objective == Catch::Approx(2.0).margin(1e-7));
}

TEST_CASE("solver: infeasible feasibility problem yields a Farkas certificate") {
    // S(x) = [[-1, 0], [0, x]] can never be PSD
    SdpMatrix f0{{{{0, 0, -1.0}}}};
    SdpMatrix f1{{{{1, 1, 1.0}}}};
    const SdpProblem p = lmi({2}, f0, {f1}, {0.0});
    const SdpOutcome o = solve(p);
    REQUIRE(o.status == SdpStatus::Infeasible);
    REQUIRE(o.cert_margin >= 1e-8);
    REQUIRE(o.dual_blocks.size() == 1);
    // certificate: X >= 0, trace 1, <F1, X> = 0, <F0, X> = -margin
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(o.dual_blocks[0], Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    CHECK(o.dual_blocks[0].trace() == Catch::Approx(1.0).margin(1e-7));
    CHECK(std::abs(o.dual_blocks[0](1, 1)) <= 1e-7);
}

TEST_CASE("solver: feasible feasibility problem reports a nonnegative margin") {
    // S(x) = [[1 + x, 0], [0, 1 - x]] : feasible with interior
    SdpMatrix f0{{{{0, 0, 1.0}, {1, 1, 1.0}}}};
    SdpMatrix f1{{{{0, 0, 1.0}, {1, 1, -1.0}}}};
    const SdpProblem p = lmi({2}, f0, {f1}, {0.0});
    const SdpOutcome o = solve(p);
    REQUIRE(o.status == SdpStatus::Optimal);
    CHECK(o.feas_margin >= 0.5); // margin solver pushes to the analytic max t* = 1
}

TEST_CASE("solver: unbounded objective is classified with a ray") {
    // maximize x s.t. [x upper-left free] : S(x) = [[1 + x]] always PSD for x >= -1
    SdpMatrix f0{{{{0, 0, 1.0}}}};
    SdpMatrix f1{{{{0, 0, 1.0}}}};
    const SdpProblem p = lmi({1}, f0, {f1}, {1.0});
    const SdpOutcome o = solve(p);
    REQUIRE(o.status == SdpStatus::Unbounded);
    REQUIRE(o.ray.size() == 1);
    CHECK(o.ray[0] > 0.0);
}

TEST_CASE("solver: determinism (bitwise identical reruns)") {
    const MomentTemplate t = condition_template(build_template(1, 25));
    std::vector<PointConstraint> cs{PointConstraint::fix(0, Rational(31, 2))};
    const SdpProblem p = assemble_lambda_max(t, cs);
    const SdpOutcome a = solve(p);
    const SdpOutcome b = solve(p);
    REQUIRE(a.status == b.status);
    REQUIRE(std::memcmp(&a.objective, &b.objective, sizeof(double)) == 0);
    REQUIRE(a.z.size() == b.z.size());
    for (std::size_t i = 0; i < a.z.size(); ++i)
        REQUIRE(std::memcmp(&a.z[i], &b.z[i], sizeof(double)) == 0);
}

TEST_CASE("solver: weak duality and cone membership along the iterates") {
    const MomentTemplate t = condition_template(build_template(1, 10));
    std::vector<PointConstraint> cs{PointConstraint::fix(0, 5)};
    const SdpProblem p = assemble_lambda_max(t, cs);
    SdpOptions opts;
    int count = 0;
    opts.iterate_callback = [&](const SdpIterate& it) {
        ++count;
        CHECK(it.complementarity >= 0.0);
        CHECK(it.tau > 0.0);
        CHECK(it.kappa >= 0.0);
        CHECK(it.mu >= 0.0);
    };
    const SdpOutcome o = solve(p, opts);
    REQUIRE(o.status == SdpStatus::Optimal);
    REQUIRE(count > 3);
    // at the returned solution the duality gap obeys the tolerance contract
    REQUIRE(o.stats.gap <= 1e-8 * (1.0 + std::abs(o.objective)));
}

TEST_CASE("sdpa export: header of the mu=1 N=10 template with no fixings") {
    const MomentTemplate t = condition_template(build_template(1, 10));
    const SdpProblem p = assemble_feasibility(t, {});
    const std::string text = export_standard(p);
    std::istringstream is(text);
    std::string l1, l2, l3;
    std::getline(is, l1);
    std::getline(is, l2);
    std::getline(is, l3);
    CHECK(l1 == std::to_string(p.variables.size()));
    CHECK(l2 == "5");
    CHECK(l3 == "6 6 6 6 6");
    CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("sdpa export round-trips exactly") {
    const MomentTemplate t = condition_template(build_template(1, 7));
    std::vector<PointConstraint> cs{PointConstraint::fix(0, 3)};
    const SdpProblem p = assemble_lambda_max(t, cs);
    const std::string text = export_standard(p);
    const SdpProblem q = parse_sdpa(text);

    REQUIRE(q.block_sizes == p.block_sizes);
    REQUIRE(q.objective.size() == p.objective.size());
    for (std::size_t k = 0; k < p.objective.size(); ++k)
        REQUIRE(q.objective[k] == p.objective[k]);
    // identical bytes after a second export
    REQUIRE(export_standard(q) == text);

    // and the re-imported problem solves to the bitwise-same optimum
    const SdpOutcome a = solve(p);
    const SdpOutcome b = solve(q);
    REQUIRE(a.status == SdpStatus::Optimal);
    REQUIRE(std::memcmp(&a.objective, &b.objective, sizeof(double)) == 0);
}

TEST_CASE("sdpa parser rejects malformed input") {
    CHECK_THROWS_AS(parse_sdpa("1\n2\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sdpa("1\n1\n2 2\n0.0\n"), std::invalid_argument);
}
