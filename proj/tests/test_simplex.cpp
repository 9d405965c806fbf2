#include "bellcert/simplex.hpp"

#include "catch_amalgamated.hpp"

using namespace bellcert;

namespace {

LpProblem make(std::size_t rows, std::vector<std::vector<Rational>> cols,
               std::vector<Rational> rhs, std::vector<Rational> cost) {
    LpProblem p;
    p.rows = rows;
    p.columns = std::move(cols);
    p.rhs = std::move(rhs);
    p.cost = std::move(cost);
    return p;
}

} // namespace

TEST_CASE("simplex solves a small equality LP exactly") {
    // min -x1 - 2 x2  s.t.  x1 + x2 + s1 = 4, x1 + 3 x2 + s2 = 6, x >= 0
    LpProblem p = make(2,
                       {{1, 1}, {1, 3}, {1, 0}, {0, 1}},
                       {4, 6},
                       {-1, -2, 0, 0});
    const LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == 3);
    CHECK(s.x[1] == 1);
    CHECK(s.objective == -5);
}

TEST_CASE("simplex detects infeasibility with a Farkas certificate") {
    // x1 + x2 = 2, x1 + x2 = 3 cannot both hold
    LpProblem p = make(2, {{1, 1}, {1, 1}}, {2, 3}, {0, 0});
    const LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Infeasible);
    REQUIRE(s.dual.size() == 2);
    // y.A_j <= 0 for all columns, y.b > 0
    for (const auto& col : p.columns) {
        Rational dot = 0;
        for (std::size_t r = 0; r < 2; ++r) dot += s.dual[r] * col[r];
        CHECK(dot <= 0);
    }
    Rational yb = s.dual[0] * p.rhs[0] + s.dual[1] * p.rhs[1];
    CHECK(yb > 0);
}

TEST_CASE("simplex detects unboundedness") {
    // min -x1 s.t. x1 - x2 = 0 : x1 can grow without bound
    LpProblem p = make(1, {{1}, {-1}}, {0}, {-1, 0});
    const LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Unbounded);
}

TEST_CASE("Bland's rule terminates on a cycling-prone degenerate instance") {
    // Dantzig's cycling example in slack form; optimum -1/20 at x = (1/25, 0, 1, 0)
    LpProblem p = make(3,
                       {{Rational(1, 4), Rational(1, 2), 0},
                        {-60, -90, 0},
                        {Rational(-1, 25), Rational(-1, 50), 1},
                        {9, 3, 0},
                        {1, 0, 0},
                        {0, 1, 0},
                        {0, 0, 1}},
                       {0, 0, 1},
                       {Rational(-3, 4), 150, Rational(-1, 50), 6, 0, 0, 0});
    const LpSolution s = solve_lp(p, 100000);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == Rational(-1, 20));
}

TEST_CASE("negative right-hand sides are handled") {
    // x1 - x2 = -1, x1 + x2 = 3 -> x = (1, 2)
    LpProblem p = make(2, {{1, 1}, {-1, 1}}, {-1, 3}, {1, 1});
    const LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == 1);
    CHECK(s.x[1] == 2);
}

TEST_CASE("iteration cap raises LpStalled") {
    LpProblem p = make(2, {{1, 1}, {1, 3}, {1, 0}, {0, 1}}, {4, 6}, {-1, -2, 0, 0});
    CHECK_THROWS_AS(solve_lp(p, 1), LpStalled);
}
