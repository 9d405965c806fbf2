#include "bellcert/moment.hpp"

#include "catch_amalgamated.hpp"

#include <Eigen/Dense>

#include <random>

using namespace bellcert;

namespace {

// Numeric block evaluation of the linearized template at a full y assignment
// (unconditioned y values per monomial).
Eigen::MatrixXd eval_block(const MomentTemplate& t, std::size_t block,
                           const std::map<Monomial, double>& y) {
    const int n = t.blocks[block].size;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < t.y_index.size(); ++j) {
        const auto it = y.find(t.y_index[j]);
        REQUIRE(it != y.end());
        const double yv = it->second * to_double(t.scaling[j]); // conditioned variable
        for (const auto& trip : t.blocks[block].coeff[j]) {
            const double v = to_double(trip.value) * yv;
            m(trip.row, trip.col) += v;
            if (trip.row != trip.col) m(trip.col, trip.row) += v;
        }
    }
    return m;
}

std::map<Monomial, double> moments_at(const MomentTemplate& t, const CorrelatorsD& s) {
    std::map<Monomial, double> y;
    for (const auto& m : t.y_index) {
        double v = 1.0;
        for (int i = 0; i < 5; ++i)
            for (int k = 0; k < m.e[i]; ++k) v *= s[i];
        y[m] = v;
    }
    return y;
}

} // namespace

TEST_CASE("mu = 1 template has five 6x6 blocks (30 x 30 total)") {
    const MomentTemplate t = build_template(1, 10);
    REQUIRE(t.blocks.size() == 5);
    for (const auto& b : t.blocks) CHECK(b.size == 6);
    CHECK(t.basis.size() == 6);
    CHECK(t.y_index[0].is_constant());

    // block 0 entry (S0, S0) = y_{S00} + N (indices: 1 = S0, 3 = S00 in the basis)
    const int pos_s00 = t.position_of(Monomial::variable(2));
    const int pos_one = 0;
    bool found_s00 = false, found_const = false;
    for (const auto& trip : t.blocks[0].coeff[pos_s00])
        if (trip.row == 1 && trip.col == 1) {
            CHECK(trip.value == 1);
            found_s00 = true;
        }
    for (const auto& trip : t.blocks[0].coeff[pos_one]) {
        if (trip.row == 1 && trip.col == 1) {
            CHECK(trip.value == 10);
            found_const = true;
        }
        if (trip.row == 0 && trip.col == 0) CHECK(trip.value == 1); // g_0 = 1
    }
    CHECK(found_s00);
    CHECK(found_const);
}

TEST_CASE("mu = 2 template blocks extend the mu = 1 blocks") {
    const MomentTemplate t1 = build_template(1, 7);
    const MomentTemplate t2 = build_template(2, 7);
    REQUIRE(t2.basis.size() == 19);
    for (std::size_t i = 0; i < 6; ++i) REQUIRE(t2.basis[i] == t1.basis[i]);

    // the leading 6x6 principal submatrix of each mu=2 block carries exactly
    // the mu=1 linear forms
    for (std::size_t b = 0; b < 5; ++b) {
        std::map<std::tuple<int, int, int>, Rational> upper; // (mono pos in t1, a, c)
        for (std::size_t j = 0; j < t2.y_index.size(); ++j) {
            const int j1 = t1.position_of(t2.y_index[j]);
            for (const auto& trip : t2.blocks[b].coeff[j]) {
                if (trip.row >= 6 || trip.col >= 6) continue;
                REQUIRE(j1 >= 0); // a monomial confined to the leading corner exists at mu=1
                upper[{j1, trip.row, trip.col}] += trip.value;
            }
        }
        std::map<std::tuple<int, int, int>, Rational> base;
        for (std::size_t j = 0; j < t1.y_index.size(); ++j)
            for (const auto& trip : t1.blocks[b].coeff[j])
                base[{static_cast<int>(j), trip.row, trip.col}] += trip.value;
        REQUIRE(upper == base);
    }
}

TEST_CASE("template is exact on the relaxed surface: blocks become x_i rank-1") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        double raw[4], sum = 0;
        for (double& r : raw) {
            r = u(rng);
            sum += r;
        }
        RealCounts x;
        for (int i = 0; i < 4; ++i) x[i] = 10.0 * raw[i] / sum;
        const CorrelatorsD s = relaxed_surface_point(x, 10);

        for (int mu : {1, 2}) {
            const MomentTemplate t = build_template(mu, 10);
            const auto y = moments_at(t, s);
            // basis vector evaluated at s
            Eigen::VectorXd bvec(t.basis.size());
            for (std::size_t a = 0; a < t.basis.size(); ++a) {
                double v = 1.0;
                for (int i = 0; i < 5; ++i)
                    for (int k = 0; k < t.basis[a].e[i]; ++k) v *= s[i];
                bvec[a] = v;
            }
            const double gvals[5] = {1.0, x[0], x[1], x[2], x[3]};
            for (std::size_t blk = 0; blk < t.blocks.size(); ++blk) {
                const Eigen::MatrixXd got = eval_block(t, blk, y);
                const Eigen::MatrixXd want = gvals[blk] * (bvec * bvec.transpose());
                REQUIRE((got - want).lpNorm<Eigen::Infinity>() <=
                        1e-9 * (1.0 + want.lpNorm<Eigen::Infinity>()));
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(got, Eigen::EigenvaluesOnly);
                REQUIRE(es.eigenvalues().minCoeff() >= -1e-7 * (1.0 + std::abs(got.trace())));
            }
        }
    }
}

TEST_CASE("entry linearity is exact in rational arithmetic") {
    const MomentTemplate t = build_template(1, 10);
    const TriangularIdeal ideal = TriangularIdeal::correlator_ideal(10);
    const auto gs = constraint_polynomials(10);
    std::vector<Polynomial> mult;
    mult.push_back(Polynomial::constant(1));
    for (const auto& g : gs) mult.push_back(g);

    // rational y assignment from a rational surface point
    std::array<Rational, 4> x{Rational(7, 2), Rational(3, 2), Rational(5, 2), Rational(5, 2)};
    const Correlators s = vertex_correlators<Rational>(x, Rational(10));
    std::map<Monomial, Rational> y;
    for (const auto& m : t.y_index) {
        Rational v = 1;
        for (int i = 0; i < 5; ++i)
            for (int k = 0; k < m.e[i]; ++k) v *= s[i];
        y[m] = v;
    }
    for (std::size_t blk = 0; blk < t.blocks.size(); ++blk) {
        // linear form value at (0-based) entry (1, 2) = (S0, S1)
        Rational lin = 0;
        for (std::size_t j = 0; j < t.y_index.size(); ++j)
            for (const auto& trip : t.blocks[blk].coeff[j])
                if (trip.row == 1 && trip.col == 2) lin += trip.value * y[t.y_index[j]];
        const Polynomial entry =
            ideal.reduce(mult[blk] * Polynomial::term(t.basis[1] * t.basis[2], 1));
        REQUIRE(lin == entry.evaluate(s));
    }
}

TEST_CASE("shared mode ties the blocks into (N+1) times the pure moment block") {
    const MomentTemplate ind = build_template(1, 10);
    const MomentTemplate sh = build_template(1, 10, /*shared=*/true);
    REQUIRE(sh.blocks.size() == 1);
    // shared block = sum over i of g_i-weighted blocks = (N + 1) * block 0
    for (std::size_t j = 0; j < sh.y_index.size(); ++j) {
        std::map<std::pair<int, int>, Rational> got, want;
        for (const auto& trip : sh.blocks[0].coeff[j]) got[{trip.row, trip.col}] += trip.value;
        const int j0 = ind.position_of(sh.y_index[j]);
        if (j0 >= 0)
            for (const auto& trip : ind.blocks[0].coeff[j0])
                want[{trip.row, trip.col}] += Rational(11) * trip.value;
        for (auto& [k, v] : want)
            if (v == 0) want.erase(k);
        REQUIRE(got == want);
    }
}

TEST_CASE("conditioning scales monomials by N^-nat_degree and preserves values") {
    const MomentTemplate t = build_template(1, 10);
    const MomentTemplate c = condition_template(t);
    CHECK(c.scaling[0] == 1);
    CHECK(c.scaling[c.position_of(Monomial::variable(0))] == Rational(1, 10));
    CHECK(c.scaling[c.position_of(Monomial::variable(2))] == Rational(1, 100));

    // conditioned block value = (1/N) D (unconditioned block) D
    const CorrelatorsD s = relaxed_surface_point({4.0, 3.0, 2.0, 1.0}, 10);
    const auto y = moments_at(t, s);
    for (std::size_t blk = 0; blk < t.blocks.size(); ++blk) {
        const Eigen::MatrixXd raw = eval_block(t, blk, y);
        const Eigen::MatrixXd cond = eval_block(c, blk, y);
        Eigen::VectorXd d(t.basis.size());
        for (std::size_t a = 0; a < t.basis.size(); ++a)
            d[a] = std::pow(10.0, -t.basis[a].nat_degree());
        const Eigen::MatrixXd want = (d.asDiagonal() * raw * d.asDiagonal()) / 10.0;
        REQUIRE((cond - want).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + want.norm()));
    }
}

TEST_CASE("assemble rejects bad inputs") {
    const MomentTemplate t = condition_template(build_template(1, 10));
    // contradictory fixings of the same functional
    std::vector<PointConstraint> cs{PointConstraint::fix(0, 3), PointConstraint::fix(0, 4)};
    CHECK_THROWS_AS(assemble_feasibility(t, cs), std::invalid_argument);
    // zero direction
    std::vector<PointConstraint> zero(1);
    CHECK_THROWS_AS(assemble_lambda_max(t, zero), std::invalid_argument);
    CHECK_THROWS_AS(assemble_lambda_max(t, {}), std::invalid_argument);
    // consistent duplicates are dropped, not fatal
    std::vector<PointConstraint> dup{PointConstraint::fix(0, 3), PointConstraint::fix(0, 3)};
    CHECK_NOTHROW(assemble_feasibility(t, dup));
}

TEST_CASE("assembled problems carry consistent shapes") {
    const MomentTemplate t = condition_template(build_template(1, 10));
    std::vector<PointConstraint> cs{PointConstraint::fix(0, 5)};
    const SdpProblem f = assemble_feasibility(t, cs);
    f.validate();
    CHECK(f.is_feasibility());
    CHECK(f.block_sizes == std::vector<int>(5, 6));

    const SdpProblem l = assemble_lambda_max(t, cs);
    l.validate();
    CHECK(!l.is_feasibility());
    REQUIRE(l.meta.has_value());
    CHECK(l.meta->lambda_mode);
    CHECK(l.var_names[l.meta->lambda_var] == "lambda");
    // lambda-mode has one more effective degree of freedom than the fixing removes
    CHECK(l.variables.size() >= f.variables.size());
}
