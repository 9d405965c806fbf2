#pragma once

#include "bellcert/polynomial.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bellcert {

/// A rewrite rule lead -> rhs; reduction replaces any monomial divisible by
/// `lead`. Every rhs monomial must be strictly smaller than `lead` in the
/// monomial order, which makes reduction terminate and, for pairwise coprime
/// leads, confluent.
struct RewriteRule {
    Monomial lead;
    Polynomial rhs;
};

/// Normal-form reduction modulo a triangular ideal: each generator is solved
/// for a leading monomial that shares no variable with any other generator's
/// lead. The d = K = 2 correlator ideal (S0^2 -> S00 + N, S1^2 -> S11 + N)
/// is the only instance used here; the class exists as the seam for other
/// scenarios.
class TriangularIdeal {
  public:
    explicit TriangularIdeal(std::vector<RewriteRule> rules) : rules_(std::move(rules)) {
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            const auto& r = rules_[i];
            if (r.lead.is_constant())
                throw std::invalid_argument("ideal: rule lead must be non-constant");
            for (const auto& [m, c] : r.rhs.terms())
                if (!(m < r.lead))
                    throw std::invalid_argument("ideal: rhs monomials must be below the lead");
            for (std::size_t j = i + 1; j < rules_.size(); ++j) {
                for (int v = 0; v < 5; ++v)
                    if (r.lead.e[v] > 0 && rules_[j].lead.e[v] > 0)
                        throw std::invalid_argument("ideal: rule leads must be coprime");
            }
        }
    }

    static TriangularIdeal correlator_ideal(long long n) {
        Monomial s0sq = Monomial::variable(0, 2);
        Monomial s1sq = Monomial::variable(1, 2);
        Polynomial r0 = Polynomial::variable(2) + Polynomial::constant(n);
        Polynomial r1 = Polynomial::variable(4) + Polynomial::constant(n);
        return TriangularIdeal({{s0sq, r0}, {s1sq, r1}});
    }

    const std::vector<RewriteRule>& rules() const { return rules_; }

    /// Unique normal form of p modulo the ideal.
    Polynomial reduce(const Polynomial& p) const {
        Polynomial out;
        std::vector<std::pair<Monomial, Rational>> work(p.terms().begin(), p.terms().end());
        while (!work.empty()) {
            auto [m, c] = work.back();
            work.pop_back();
            const RewriteRule* hit = nullptr;
            for (const auto& r : rules_) {
                if (m.divisible_by(r.lead)) {
                    hit = &r;
                    break;
                }
            }
            if (!hit) {
                out.add_term(m, c);
                continue;
            }
            const Monomial q = m.divided_by(hit->lead);
            for (const auto& [rm, rc] : hit->rhs.terms()) work.emplace_back(rm * q, rc * c);
        }
        return out;
    }

  private:
    std::vector<RewriteRule> rules_;
};

/// Generators of the correlator ideal: f1 = S00 - S0^2 + N,
/// f2 = S11 - S1^2 + N. Both vanish identically on the relaxed surface.
inline std::pair<Polynomial, Polynomial> ideal_generators(long long n) {
    Polynomial f1 = Polynomial::variable(2) - Polynomial::term(Monomial::variable(0, 2), 1) +
                    Polynomial::constant(n);
    Polynomial f2 = Polynomial::variable(4) - Polynomial::term(Monomial::variable(1, 2), 1) +
                    Polynomial::constant(n);
    return {f1, f2};
}

inline Polynomial reduce(const Polynomial& p, long long n) {
    return TriangularIdeal::correlator_ideal(n).reduce(p);
}

/// Normal-form monomials of degree <= mu in the quotient-basis grading,
/// degree-graded and ordered so that element 0 is the constant and the
/// degree-1 slice reads (S0, S1, S00, S01, S11).
inline std::vector<Monomial> quotient_basis(int mu) {
    if (mu < 0 || mu > 2) throw std::invalid_argument("quotient_basis: mu must be in {0, 1, 2}");
    std::vector<Monomial> basis;
    for (int e0 = 0; e0 <= 1; ++e0)
        for (int e1 = 0; e1 <= 1; ++e1)
            for (int e00 = 0; e00 <= mu; ++e00)
                for (int e01 = 0; e01 <= mu; ++e01)
                    for (int e11 = 0; e11 <= mu; ++e11) {
                        Monomial m;
                        m.e = {static_cast<std::uint16_t>(e0), static_cast<std::uint16_t>(e1),
                               static_cast<std::uint16_t>(e00), static_cast<std::uint16_t>(e01),
                               static_cast<std::uint16_t>(e11)};
                        if (m.degree() <= mu) basis.push_back(m);
                    }
    std::sort(basis.begin(), basis.end());
    return basis;
}

/// The four polynomials g_i with g_i(S(x)) = x_i: the Hadamard inversion of
/// the correlator map, with Z = S0*S1 - S01 and the N row substituted as the
/// exact constant. Signs follow the strategy ordering of enumerate_lds.
inline std::array<Polynomial, 4> constraint_polynomials(long long n) {
    const auto lds = enumerate_lds(2);
    const Polynomial s0 = Polynomial::variable(0);
    const Polynomial s1 = Polynomial::variable(1);
    const Polynomial z = s0 * s1 - Polynomial::variable(3);
    std::array<Polynomial, 4> g;
    for (int i = 0; i < 4; ++i) {
        const int sign0 = lds[i][0], sign1 = lds[i][1];
        Polynomial p = Polynomial::constant(n) + Rational(sign1) * s1 + Rational(sign0) * s0 +
                       Rational(sign0 * sign1) * z;
        g[i] = p * Rational(1, 4);
    }
    return g;
}

} // namespace bellcert
