#pragma once

#include "bellcert/rational.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bellcert {

/// Thrown when the simplex hits its iteration cap. Distinct from Infeasible:
/// callers must never confuse a stalled solve with a verdict.
class LpStalled : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// min c.x  s.t.  A x = b, x >= 0, with A stored column-wise.
struct LpProblem {
    std::size_t rows = 0;
    std::vector<std::vector<Rational>> columns;
    std::vector<Rational> rhs;
    std::vector<Rational> cost;
};

struct LpSolution {
    LpStatus status = LpStatus::Optimal;
    Rational objective;
    std::vector<Rational> x;
    // Optimal: simplex prices y with c_j - y.A_j >= 0 for all j.
    // Infeasible: Farkas certificate y with y.A_j <= 0 for all j, y.b > 0.
    std::vector<Rational> dual;
    long long iterations = 0;
};

/// Dense revised simplex over exact rationals with Bland's anti-cycling rule.
/// Exactness of the vertex/weight certificates is the point; instance sizes
/// here never justify an interior-point LP.
class Simplex {
  public:
    explicit Simplex(const LpProblem& p, long long max_iterations = 2000000)
        : rows_(p.rows), cols_(p.columns), rhs_(p.rhs), cost_(p.cost), max_iter_(max_iterations) {
        if (cols_.size() != cost_.size() || rhs_.size() != rows_)
            throw std::invalid_argument("simplex: inconsistent problem dimensions");
        for (const auto& col : cols_)
            if (col.size() != rows_) throw std::invalid_argument("simplex: bad column length");
        row_sign_.assign(rows_, 1);
        for (std::size_t i = 0; i < rows_; ++i) {
            if (rhs_[i] < 0) {
                row_sign_[i] = -1;
                rhs_[i] = -rhs_[i];
                for (auto& col : cols_) col[i] = -col[i];
            }
        }
    }

    LpSolution solve() {
        const std::size_t n = cols_.size();
        basis_.resize(rows_);
        binv_.assign(rows_, std::vector<Rational>(rows_, 0));
        xb_ = rhs_;
        for (std::size_t i = 0; i < rows_; ++i) {
            basis_[i] = n + i; // artificial
            binv_[i][i] = 1;
        }

        // Phase 1: minimize the sum of artificials.
        std::vector<Rational> phase1_cost(n + rows_, 0);
        for (std::size_t i = 0; i < rows_; ++i) phase1_cost[n + i] = 1;
        LpStatus st = iterate(phase1_cost);
        if (st == LpStatus::Unbounded)
            throw std::logic_error("simplex: phase 1 cannot be unbounded");
        Rational art_sum = 0;
        for (std::size_t i = 0; i < rows_; ++i)
            if (basis_[i] >= n) art_sum += xb_[i];
        if (art_sum > 0) {
            LpSolution sol;
            sol.status = LpStatus::Infeasible;
            sol.objective = art_sum;
            sol.dual = prices(phase1_cost);
            sol.iterations = iterations_;
            return sol;
        }

        // Phase 2: artificials may stay basic at zero but never re-enter.
        std::vector<Rational> phase2_cost(n + rows_, 0);
        for (std::size_t j = 0; j < n; ++j) phase2_cost[j] = cost_[j];
        st = iterate(phase2_cost);

        LpSolution sol;
        sol.status = st;
        sol.iterations = iterations_;
        sol.x.assign(n, 0);
        for (std::size_t i = 0; i < rows_; ++i)
            if (basis_[i] < n) sol.x[basis_[i]] = xb_[i];
        sol.objective = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (sol.x[j] != 0) sol.objective += cost_[j] * sol.x[j];
        sol.dual = prices(phase2_cost);
        return sol;
    }

  private:
    std::vector<Rational> column(std::size_t j) const {
        const std::size_t n = cols_.size();
        if (j < n) return cols_[j];
        std::vector<Rational> e(rows_, 0);
        e[j - n] = 1;
        return e;
    }

    std::vector<Rational> prices(const std::vector<Rational>& cost) const {
        // y = c_B . B^{-1}, mapped back through the row sign flips.
        std::vector<Rational> y(rows_, 0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const Rational& cb = cost[basis_[i]];
            if (cb == 0) continue;
            for (std::size_t r = 0; r < rows_; ++r) y[r] += cb * binv_[i][r];
        }
        for (std::size_t r = 0; r < rows_; ++r)
            if (row_sign_[r] < 0) y[r] = -y[r];
        return y;
    }

    // Artificial columns never re-enter; they start basic in phase 1 and may
    // only leave.
    LpStatus iterate(const std::vector<Rational>& cost) {
        const std::size_t n = cols_.size();
        const std::size_t total = n + rows_;
        std::vector<Rational> y(rows_);
        std::vector<bool> in_basis(total, false);
        for (;;) {
            if (++iterations_ > max_iter_)
                throw LpStalled("simplex: iteration cap reached after " +
                                std::to_string(iterations_) + " pivots");
            // y = c_B B^{-1}
            for (std::size_t r = 0; r < rows_; ++r) y[r] = 0;
            for (std::size_t i = 0; i < rows_; ++i) {
                const Rational& cb = cost[basis_[i]];
                if (cb == 0) continue;
                for (std::size_t r = 0; r < rows_; ++r) y[r] += cb * binv_[i][r];
            }
            std::fill(in_basis.begin(), in_basis.end(), false);
            for (std::size_t i = 0; i < rows_; ++i) in_basis[basis_[i]] = true;

            // Bland: entering = lowest-index column with negative reduced cost.
            std::size_t entering = total;
            for (std::size_t j = 0; j < n; ++j) {
                if (in_basis[j]) continue;
                Rational rc = cost[j];
                const auto& aj = cols_[j];
                for (std::size_t r = 0; r < rows_; ++r)
                    if (aj[r] != 0) rc -= y[r] * aj[r];
                if (rc < 0) {
                    entering = j;
                    break;
                }
            }
            if (entering == total) return LpStatus::Optimal;

            // direction d = B^{-1} A_e
            std::vector<Rational> aj = column(entering);
            std::vector<Rational> d(rows_, 0);
            for (std::size_t i = 0; i < rows_; ++i)
                for (std::size_t r = 0; r < rows_; ++r)
                    if (binv_[i][r] != 0 && aj[r] != 0) d[i] += binv_[i][r] * aj[r];

            // Bland ratio test: min ratio, ties by smallest basis variable.
            std::size_t leave = rows_;
            Rational best_ratio = 0;
            for (std::size_t i = 0; i < rows_; ++i) {
                if (d[i] <= 0) continue;
                Rational ratio = xb_[i] / d[i];
                if (leave == rows_ || ratio < best_ratio ||
                    (ratio == best_ratio && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == rows_) return LpStatus::Unbounded;

            // pivot: row ops on B^{-1} and x_B
            const Rational piv = d[leave];
            for (std::size_t r = 0; r < rows_; ++r) binv_[leave][r] /= piv;
            xb_[leave] /= piv;
            for (std::size_t i = 0; i < rows_; ++i) {
                if (i == leave || d[i] == 0) continue;
                const Rational f = d[i];
                for (std::size_t r = 0; r < rows_; ++r)
                    if (binv_[leave][r] != 0) binv_[i][r] -= f * binv_[leave][r];
                xb_[i] -= f * xb_[leave];
            }
            basis_[leave] = entering;
        }
    }

    std::size_t rows_;
    std::vector<std::vector<Rational>> cols_;
    std::vector<Rational> rhs_;
    std::vector<Rational> cost_;
    std::vector<int> row_sign_;
    long long max_iter_;
    long long iterations_ = 0;

    std::vector<std::size_t> basis_;
    std::vector<std::vector<Rational>> binv_;
    std::vector<Rational> xb_;
};

inline LpSolution solve_lp(const LpProblem& p, long long max_iterations = 2000000) {
    return Simplex(p, max_iterations).solve();
}

} // namespace bellcert
