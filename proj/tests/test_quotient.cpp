#include "bellcert/polytope.hpp"
#include "bellcert/quotient.hpp"

#include "catch_amalgamated.hpp"

#include <random>
#include <vector>

using namespace bellcert;

namespace {

Monomial mono(int e0, int e1, int e00, int e01, int e11) {
    Monomial m;
    m.e = {static_cast<std::uint16_t>(e0), static_cast<std::uint16_t>(e1),
           static_cast<std::uint16_t>(e00), static_cast<std::uint16_t>(e01),
           static_cast<std::uint16_t>(e11)};
    return m;
}

Polynomial random_polynomial(std::mt19937& rng, int max_degree, int max_terms) {
    std::uniform_int_distribution<int> e01d(0, max_degree);
    std::uniform_int_distribution<int> coefd(-6, 6);
    std::uniform_int_distribution<int> dend(1, 4);
    std::uniform_int_distribution<int> termd(1, max_terms);
    Polynomial p;
    const int terms = termd(rng);
    for (int t = 0; t < terms; ++t) {
        int e[5];
        int total = 0;
        for (int i = 0; i < 5; ++i) {
            e[i] = e01d(rng);
            total += e[i];
        }
        if (total > max_degree) continue;
        p += Polynomial::term(mono(e[0], e[1], e[2], e[3], e[4]),
                              Rational(coefd(rng), dend(rng)));
    }
    return p;
}

// Reducer that applies the two rewrite rules one random step at a time;
// independent of the library's worklist order.
Polynomial randomized_reduce(const Polynomial& p, long long n, std::mt19937& rng) {
    Polynomial cur = p;
    for (;;) {
        std::vector<std::pair<Monomial, Rational>> reducible;
        for (const auto& [m, c] : cur.terms())
            if (m.e[0] >= 2 || m.e[1] >= 2) reducible.emplace_back(m, c);
        if (reducible.empty()) return cur;
        std::uniform_int_distribution<std::size_t> pick(0, reducible.size() - 1);
        const auto [m, c] = reducible[pick(rng)];
        // choose which rule to apply when both match
        bool use_s0 = m.e[0] >= 2;
        if (m.e[0] >= 2 && m.e[1] >= 2) use_s0 = (rng() & 1u) != 0;
        Monomial rest = m;
        Polynomial replacement;
        if (use_s0) {
            rest.e[0] = static_cast<std::uint16_t>(rest.e[0] - 2);
            replacement = Polynomial::variable(2) + Polynomial::constant(n);
        } else {
            rest.e[1] = static_cast<std::uint16_t>(rest.e[1] - 2);
            replacement = Polynomial::variable(4) + Polynomial::constant(n);
        }
        cur -= Polynomial::term(m, c);
        cur += (replacement * c) * Polynomial::term(rest, 1);
    }
}

Correlators surface_point(const std::array<Rational, 4>& x, long long n) {
    return vertex_correlators<Rational>(x, Rational(n));
}

// Exact rational point of the simplex: positive integer draws rescaled to sum N.
std::array<Rational, 4> random_rational_counts(std::mt19937& rng, long long n) {
    std::uniform_int_distribution<int> d(1, 20);
    std::array<int, 4> a{d(rng), d(rng), d(rng), d(rng)};
    const int sum = a[0] + a[1] + a[2] + a[3];
    std::array<Rational, 4> x;
    for (int i = 0; i < 4; ++i) x[i] = Rational(n) * Rational(a[i], sum);
    return x;
}

} // namespace

TEST_CASE("ideal generators vanish on vertices and the relaxed surface") {
    const auto [f1, f2] = ideal_generators(10);
    Polynomial expect_f1 = Polynomial::variable(2) -
                           Polynomial::term(Monomial::variable(0, 2), 1) +
                           Polynomial::constant(10);
    CHECK(f1 == expect_f1);

    for (const auto& [x, s] : enumerate_vertices(10)) {
        const Correlators sq = to_rationals(s);
        CHECK(f1.evaluate(sq) == 0);
        CHECK(f2.evaluate(sq) == 0);
    }

    std::mt19937 rng(7);
    for (int t = 0; t < 25; ++t) {
        const Correlators s = surface_point(random_rational_counts(rng, 10), 10);
        CHECK(f1.evaluate(s) == 0);
        CHECK(f2.evaluate(s) == 0);
    }
}

TEST_CASE("reduce applies the rewrite rules to normal form") {
    const long long n = 10;
    CHECK(reduce(Polynomial::term(Monomial::variable(0, 2), 1), n) ==
          Polynomial::variable(2) + Polynomial::constant(n));

    // S0^2 S1 -> S00 S1 + N S1
    Polynomial p = Polynomial::term(mono(2, 1, 0, 0, 0), 1);
    Polynomial expect = Polynomial::term(mono(0, 1, 1, 0, 0), 1) +
                        Rational(n) * Polynomial::variable(1);
    CHECK(reduce(p, n) == expect);

    // S0^4 -> S00^2 + 2N S00 + N^2
    p = Polynomial::term(mono(4, 0, 0, 0, 0), 1);
    expect = Polynomial::term(mono(0, 0, 2, 0, 0), 1) +
             Rational(2 * n) * Polynomial::variable(2) + Polynomial::constant(n * n);
    CHECK(reduce(p, n) == expect);
    CHECK(reduce(p, n).is_normal_form());
}

TEST_CASE("reduction is exact on the relaxed surface") {
    const long long n = 10;
    std::mt19937 rng(99);
    const Polynomial s0_4 = Polynomial::term(mono(4, 0, 0, 0, 0), 1);
    const Polynomial reduced = reduce(s0_4, n);
    for (int t = 0; t < 50; ++t) {
        const Correlators s = surface_point(random_rational_counts(rng, n), n);
        REQUIRE(reduced.evaluate(s) == s0_4.evaluate(s));
    }
}

TEST_CASE("quotient basis") {
    const auto b0 = quotient_basis(0);
    REQUIRE(b0.size() == 1);
    CHECK(b0[0].is_constant());

    const auto b1 = quotient_basis(1);
    REQUIRE(b1.size() == 6);
    CHECK(b1[0] == mono(0, 0, 0, 0, 0));
    CHECK(b1[1] == mono(1, 0, 0, 0, 0));
    CHECK(b1[2] == mono(0, 1, 0, 0, 0));
    CHECK(b1[3] == mono(0, 0, 1, 0, 0));
    CHECK(b1[4] == mono(0, 0, 0, 1, 0));
    CHECK(b1[5] == mono(0, 0, 0, 0, 1));

    // Independent recount of the normal-form monomials of degree <= 2:
    // e0, e1 in {0,1}, any exponents on the two-body variables.
    int count = 0;
    for (int e0 = 0; e0 <= 1; ++e0)
        for (int e1 = 0; e1 <= 1; ++e1)
            for (int e00 = 0; e00 <= 2; ++e00)
                for (int e01 = 0; e01 <= 2; ++e01)
                    for (int e11 = 0; e11 <= 2; ++e11)
                        if (e0 + e1 + e00 + e01 + e11 <= 2) ++count;
    const auto b2 = quotient_basis(2);
    REQUIRE(static_cast<int>(b2.size()) == count);
    REQUIRE(b2.size() == 19);

    // degree-2 slice starts with S0*S1 and ends with S11^2
    CHECK(b2[6] == mono(1, 1, 0, 0, 0));
    CHECK(b2[18] == mono(0, 0, 0, 0, 2));
    for (const auto& m : b2) CHECK(m.is_normal_form());

    CHECK_THROWS_AS(quotient_basis(3), std::invalid_argument);
    CHECK_THROWS_AS(quotient_basis(-1), std::invalid_argument);
}

TEST_CASE("constraint polynomials match the Hadamard inversion") {
    const long long n = 10;
    const auto g = constraint_polynomials(n);

    // g1 = (N + S0 + S1 + S0 S1 - S01)/4
    Polynomial expect = (Polynomial::constant(n) + Polynomial::variable(0) +
                         Polynomial::variable(1) + Polynomial::term(mono(1, 1, 0, 0, 0), 1) -
                         Polynomial::variable(3)) *
                        Rational(1, 4);
    CHECK(g[0] == expect);

    // sum of the g_i is identically N
    Polynomial sum;
    for (const auto& gi : g) sum += gi;
    CHECK(sum == Polynomial::constant(n));

    // g_i(S(x)) = x_i at a vertex
    const Correlators s = to_rationals(vertex_correlators({3, 3, 2, 2}, n));
    for (int i = 0; i < 4; ++i) {
        const std::array<long long, 4> xs{3, 3, 2, 2};
        CHECK(g[i].evaluate(s) == Rational(xs[i]));
    }
}

TEST_CASE("g identity holds exactly at random rational counts") {
    const long long n = 10;
    const auto g = constraint_polynomials(n);
    std::mt19937 rng(20260810);
    for (int t = 0; t < 200; ++t) {
        const auto x = random_rational_counts(rng, n);
        const Correlators s = surface_point(x, n);
        for (int i = 0; i < 4; ++i) REQUIRE(g[i].evaluate(s) == x[i]);
    }
}

TEST_CASE("reduction is confluent and idempotent") {
    const long long n = 7;
    std::mt19937 rng(123);
    for (int t = 0; t < 1000; ++t) {
        const Polynomial p = random_polynomial(rng, 6, 5);
        const Polynomial nf = reduce(p, n);
        REQUIRE(nf.is_normal_form());
        REQUIRE(reduce(nf, n) == nf);
        REQUIRE(randomized_reduce(p, n, rng) == nf);
    }
}

TEST_CASE("evaluate") {
    const long long n = 10;
    const auto [f1, f2] = ideal_generators(n);
    const Correlators vertex = to_rationals(vertex_correlators({10, 0, 0, 0}, n));
    CHECK(f1.evaluate(vertex) == 0);
    const auto g = constraint_polynomials(n);
    CHECK(g[0].evaluate(vertex) == 10);
}

TEST_CASE("triangular ideal seam validates its rules") {
    // leads must be coprime and rhs monomials below the lead
    CHECK_THROWS_AS(TriangularIdeal({{Monomial::variable(0, 2),
                                      Polynomial::term(Monomial::variable(0, 3), 1)}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(TriangularIdeal({{Monomial::variable(0, 2), Polynomial::constant(1)},
                                     {Monomial::variable(0, 3), Polynomial::constant(1)}}),
                    std::invalid_argument);
}
