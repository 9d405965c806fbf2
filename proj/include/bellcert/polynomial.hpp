#pragma once

#include "bellcert/rational.hpp"
#include "bellcert/scenario.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bellcert {

/// Monomial in the correlator variables (S0, S1, S00, S01, S11). A monomial
/// is in normal form modulo the correlator ideal iff e0 <= 1 and e1 <= 1.
///
/// Two gradings are used: degree() counts every variable at weight 1 (the
/// grading of the quotient basis), nat_degree() counts two-body variables at
/// weight 2 (the magnitude grading: a monomial of nat_degree k scales as N^k
/// on the polytope).
struct Monomial {
    std::array<std::uint16_t, 5> e{};

    int degree() const { return e[0] + e[1] + e[2] + e[3] + e[4]; }
    int nat_degree() const { return e[0] + e[1] + 2 * (e[2] + e[3] + e[4]); }
    bool is_constant() const { return degree() == 0; }
    bool is_normal_form() const { return e[0] <= 1 && e[1] <= 1; }

    static Monomial one() { return Monomial{}; }
    static Monomial variable(int i, int power = 1) {
        Monomial m;
        m.e[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(power);
        return m;
    }

    friend Monomial operator*(const Monomial& a, const Monomial& b) {
        Monomial m;
        for (int i = 0; i < 5; ++i) m.e[i] = static_cast<std::uint16_t>(a.e[i] + b.e[i]);
        return m;
    }

    bool divisible_by(const Monomial& d) const {
        for (int i = 0; i < 5; ++i)
            if (e[i] < d.e[i]) return false;
        return true;
    }

    Monomial divided_by(const Monomial& d) const {
        Monomial m;
        for (int i = 0; i < 5; ++i) m.e[i] = static_cast<std::uint16_t>(e[i] - d.e[i]);
        return m;
    }

    friend bool operator==(const Monomial&, const Monomial&) = default;

    // Degree-graded order, S0 > S1 > S00 > S01 > S11 dominant within a degree,
    // so that the basis reads (1, S0, S1, S00, S01, S11, S0*S1, ...).
    friend bool operator<(const Monomial& a, const Monomial& b) {
        const int da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        return a.e > b.e;
    }

    std::string str() const {
        if (is_constant()) return "1";
        std::ostringstream os;
        bool first = true;
        for (int i = 0; i < 5; ++i) {
            if (e[i] == 0) continue;
            if (!first) os << "*";
            os << correlator_name(i);
            if (e[i] > 1) os << "^" << e[i];
            first = false;
        }
        return os.str();
    }
};

/// Sparse polynomial over the correlator variables with exact rational
/// coefficients. Immutable-style value semantics; zero coefficients are never
/// stored.
class Polynomial {
  public:
    using TermMap = std::map<Monomial, Rational>;

    Polynomial() = default;

    static Polynomial zero() { return {}; }
    static Polynomial constant(const Rational& c) { return term(Monomial::one(), c); }
    static Polynomial variable(int i) { return term(Monomial::variable(i), 1); }
    static Polynomial term(const Monomial& m, const Rational& c) {
        Polynomial p;
        if (c != 0) p.terms_.emplace(m, c);
        return p;
    }

    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    const TermMap& terms() const { return terms_; }

    int degree() const {
        return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
    }

    bool is_normal_form() const {
        for (const auto& [m, c] : terms_)
            if (!m.is_normal_form()) return false;
        return true;
    }

    Rational coefficient(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    void add_term(const Monomial& m, const Rational& c) {
        if (c == 0) return;
        auto [it, inserted] = terms_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Polynomial& operator+=(const Polynomial& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    Polynomial& operator*=(const Rational& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, c] : terms_) c *= s;
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
    friend Polynomial operator*(const Rational& s, Polynomial a) { return a *= s; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Polynomial r;
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
        return r;
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

    /// Substitute correlator values and sum. T is double or Rational.
    template <class T>
    T evaluate(const BasicCorrelators<T>& s) const {
        T acc{};
        for (const auto& [m, c] : terms_) {
            T t = coefficient_as<T>(c);
            for (int i = 0; i < 5; ++i)
                for (int k = 0; k < m.e[i]; ++k) t *= s[i];
            acc += t;
        }
        return acc;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [m, c] : terms_) {
            if (!first) os << " + ";
            os << c.str();
            if (!m.is_constant()) os << "*" << m.str();
            first = false;
        }
        return os.str();
    }

  private:
    template <class T>
    static T coefficient_as(const Rational& c) {
        if constexpr (std::is_same_v<T, Rational>)
            return c;
        else
            return static_cast<T>(to_double(c));
    }

    TermMap terms_;
};

} // namespace bellcert
