#pragma once

#include "bellcert/polynomial.hpp"
#include "bellcert/rational.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bellcert {

/// One entry of a sparse symmetric block matrix; row <= col, the mirrored
/// entry is implicit.
struct SdpTriplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Block-diagonal symmetric matrix, sparse triplets per block.
struct SdpMatrix {
    std::vector<std::vector<SdpTriplet>> blocks;
};

/// Linear-matrix-inequality problem:
///
///   maximize    objective . z
///   subject to  F0 + sum_k z_k F_k  >=  0   (block-diagonal PSD)
///
/// A problem whose objective is identically zero is a pure feasibility
/// question. Assembled problems carry metadata used to map solver output back
/// to moment-space quantities.
struct SdpProblem {
    std::vector<int> block_sizes;
    SdpMatrix constant; // F0
    std::vector<SdpMatrix> variables;
    std::vector<double> objective;
    std::vector<std::string> var_names;

    struct Meta {
        bool lambda_mode = false;
        int lambda_var = -1;
        long long n = 0;
        int mu = 1;
        bool conditioned = false;
        bool shared = false;
        std::vector<Monomial> y_index;
        std::vector<double> scaling; // yhat_j = scaling_j * y_j
        // yhat = recon_const + sum over (var, coef) pairs of z_var * coef
        std::vector<double> recon_const;
        std::vector<std::vector<std::pair<int, double>>> recon_rows;
        // conditioned full coefficient matrices for [1, S0, S1, S00, S01, S11]
        std::array<SdpMatrix, 6> extraction_mats;
        std::array<double, 6> extraction_scaling{};
        // original fixing functionals in conditioned coordinates
        std::vector<std::array<double, 5>> fixing_rows;
        std::vector<double> fixing_values;
    };
    std::optional<Meta> meta;

    bool is_feasibility() const {
        for (double c : objective)
            if (c != 0.0) return false;
        return true;
    }

    void validate() const {
        const std::size_t nb = block_sizes.size();
        if (constant.blocks.size() != nb)
            throw std::invalid_argument("sdp: constant block count mismatch");
        if (objective.size() != variables.size())
            throw std::invalid_argument("sdp: objective length mismatch");
        auto check = [&](const SdpMatrix& m) {
            if (m.blocks.size() != nb) throw std::invalid_argument("sdp: block count mismatch");
            for (std::size_t b = 0; b < nb; ++b)
                for (const auto& t : m.blocks[b])
                    if (t.row < 0 || t.col < t.row || t.col >= block_sizes[b])
                        throw std::invalid_argument("sdp: triplet out of range");
        };
        check(constant);
        for (const auto& v : variables) check(v);
    }
};

enum class SdpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

inline const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::Optimal: return "Optimal";
        case SdpStatus::Infeasible: return "Infeasible";
        case SdpStatus::Unbounded: return "Unbounded";
        default: return "NumericalFailure";
    }
}

struct SdpStats {
    int iterations = 0;
    double primal_residual = std::numeric_limits<double>::quiet_NaN();
    double dual_residual = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
    double mu_final = std::numeric_limits<double>::quiet_NaN();
};

struct SdpOutcome {
    SdpStatus status = SdpStatus::NumericalFailure;
    /// lambda* for lambda problems; the feasibility margin t* for pure
    /// feasibility problems (t* >= 0 up to tolerance iff feasible).
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> z;
    /// PSD multiplier matrices (one per block). At Optimal these are the dual
    /// certificate G; at Infeasible the normalized Farkas certificate with
    /// trace 1, <F_k, X> ~ 0 and <F0, X> = -margin < 0.
    std::vector<Eigen::MatrixXd> dual_blocks;
    double feas_margin = std::numeric_limits<double>::quiet_NaN();
    double cert_margin = std::numeric_limits<double>::quiet_NaN();
    /// Unbounded: improving ray in z-space.
    std::vector<double> ray;
    SdpStats stats;
};

struct SdpIterate {
    int iteration;
    double mu, tau, kappa;
    double primal_objective, dual_objective;
    double primal_residual, dual_residual;
    double complementarity; // <X,S> (nonnegative by cone membership)
};

struct SdpOptions {
    int max_iterations = 200;
    double tol_gap = 1e-8;
    double tol_feas = 1e-8;
    double step_fraction = 0.98;
    // feasible iff margin >= -1e-7; infeasible iff margin <= -1e-6;
    // in between the engine reports Inconclusive.
    double feasible_margin = -1e-7;
    double infeasible_margin = -1e-6;
    std::function<void(const SdpIterate&)> iterate_callback;
};

namespace detail {

inline double sparse_dot(const std::vector<SdpTriplet>& a, const Eigen::MatrixXd& dense) {
    double acc = 0.0;
    for (const auto& t : a) {
        const double d = dense(t.row, t.col);
        acc += t.value * (t.row == t.col ? d : 2.0 * d);
    }
    return acc;
}

inline void add_sparse(Eigen::MatrixXd& dense, const std::vector<SdpTriplet>& a, double scale) {
    if (scale == 0.0) return;
    for (const auto& t : a) {
        dense(t.row, t.col) += scale * t.value;
        if (t.row != t.col) dense(t.col, t.row) += scale * t.value;
    }
}

inline double frob_norm_sparse(const std::vector<SdpTriplet>& a) {
    double acc = 0.0;
    for (const auto& t : a) acc += t.value * t.value * (t.row == t.col ? 1.0 : 2.0);
    return std::sqrt(acc);
}

/// Primal-dual interior-point method on the homogeneous self-dual embedding,
/// Nesterov-Todd scaling, Mehrotra predictor-corrector. The embedding is used
/// so that infeasibility shows up as a clean Farkas certificate rather than a
/// divergence heuristic.
class HsdSolver {
  public:
    HsdSolver(const SdpProblem& p, const SdpOptions& opts) : p_(p), opts_(opts) {
        nb_ = static_cast<int>(p.block_sizes.size());
        m_ = static_cast<int>(p.variables.size());
        nu_ = 0;
        for (int b = 0; b < nb_; ++b) nu_ += p.block_sizes[b];
        b_vec_ = Eigen::Map<const Eigen::VectorXd>(p.objective.data(), m_);
        norm_b_ = std::max(1.0, b_vec_.lpNorm<Eigen::Infinity>());
        norm_c_ = 1.0;
        for (int b = 0; b < nb_; ++b)
            norm_c_ = std::max(norm_c_, frob_norm_sparse(p.constant.blocks[b]));
    }

    SdpOutcome solve() {
        init();
        SdpOutcome out;
        int stall = 0;
        double mu_prev = mu();
        for (int it = 0; it <= opts_.max_iterations; ++it) {
            compute_residuals();
            const double muv = mu();
            const Metrics met = metrics();
            report(it, muv, met);
            remember_best(met, it);
            if (check_optimal(met, out, it)) return out;
            if (check_infeasible(out, it)) return out;
            if (check_unbounded(out, it)) return out;
            if (it == opts_.max_iterations) break;
            // numerical floor reached: later iterates only degrade
            if (best_.valid && met.merit > 100.0 * best_.merit) break;

            if (muv > 0.9 * mu_prev)
                ++stall;
            else
                stall = 0;
            mu_prev = muv;
            if (stall > 15) break;

            if (!factorize()) break;

            // predictor
            Dir aff;
            if (!direction(0.0, 0.0, aff)) break;
            const double alpha_aff = step_length(aff);
            const double mu_aff = mu_after(aff, alpha_aff);
            double sigma = std::pow(std::max(0.0, mu_aff / muv), 3.0);
            sigma = std::min(0.9999, std::max(1e-12, sigma));

            // corrector
            Dir dir;
            if (!direction(sigma * muv, aff.dtau * aff.dkappa, dir)) break;
            double alpha = opts_.step_fraction * step_length(dir);
            alpha = std::min(1.0, alpha);
            if (alpha < 1e-10) break;

            for (int b = 0; b < nb_; ++b) {
                X_[b] += alpha * dir.dX[b];
                S_[b] += alpha * dir.dS[b];
            }
            y_ += alpha * dir.dy;
            tau_ += alpha * dir.dtau;
            kappa_ += alpha * dir.dkappa;
        }
        // fall back to the best iterate seen; accept it if it meets the
        // tolerances (the active iterate may have degraded past the optimum)
        if (best_.valid) {
            restore_best();
            compute_residuals();
            const Metrics met = metrics();
            if (check_optimal(met, out, best_.iteration)) return out;
            if (check_infeasible(out, best_.iteration)) return out;
            if (check_unbounded(out, best_.iteration)) return out;
        }
        out.status = SdpStatus::NumericalFailure;
        fill_stats(out);
        return out;
    }

  private:
    struct Dir {
        std::vector<Eigen::MatrixXd> dX, dS;
        Eigen::VectorXd dy;
        double dtau = 0.0, dkappa = 0.0;
    };

    struct Metrics {
        double rp_rel = 0.0, rd_rel = 0.0, gap = 0.0, gap_scale = 1.0;
        double pobj = 0.0, dobj = 0.0, compl_rel = 0.0;
        double merit = 0.0;
    };

    struct Snapshot {
        bool valid = false;
        double merit = std::numeric_limits<double>::infinity();
        std::vector<Eigen::MatrixXd> X, S;
        Eigen::VectorXd y;
        double tau = 1.0, kappa = 1.0;
        int iteration = 0;
    };

    Metrics metrics() const {
        Metrics m;
        m.rp_rel = rp_.lpNorm<Eigen::Infinity>() / (tau_ * norm_b_);
        m.rd_rel = dual_residual() / tau_;
        m.pobj = cx_ / tau_;
        m.dobj = b_vec_.dot(y_) / tau_;
        m.gap = std::abs(m.pobj - m.dobj);
        m.gap_scale = 1.0 + std::max(std::abs(m.pobj), std::abs(m.dobj));
        m.compl_rel = xs_inner() / (tau_ * tau_);
        m.merit = std::max({m.rp_rel, m.rd_rel, m.gap / m.gap_scale});
        return m;
    }

    void remember_best(const Metrics& met, int it) {
        if (kappa_ > tau_) return; // ray regime, not an approach to an optimum
        if (best_.valid && met.merit >= best_.merit) return;
        best_.valid = true;
        best_.merit = met.merit;
        best_.X = X_;
        best_.S = S_;
        best_.y = y_;
        best_.tau = tau_;
        best_.kappa = kappa_;
        best_.iteration = it;
    }

    void restore_best() {
        X_ = best_.X;
        S_ = best_.S;
        y_ = best_.y;
        tau_ = best_.tau;
        kappa_ = best_.kappa;
    }

    void init() {
        X_.assign(nb_, Eigen::MatrixXd());
        S_.assign(nb_, Eigen::MatrixXd());
        for (int b = 0; b < nb_; ++b) {
            X_[b] = Eigen::MatrixXd::Identity(p_.block_sizes[b], p_.block_sizes[b]);
            S_[b] = Eigen::MatrixXd::Identity(p_.block_sizes[b], p_.block_sizes[b]);
        }
        y_ = Eigen::VectorXd::Zero(m_);
        tau_ = 1.0;
        kappa_ = 1.0;
        rp_.resize(m_);
        Rd_.assign(nb_, Eigen::MatrixXd());
        W_.assign(nb_, Eigen::MatrixXd());
        TF_.assign(m_, std::vector<Eigen::MatrixXd>(nb_));
        TF0_.assign(nb_, Eigen::MatrixXd());
    }

    double mu() const {
        double acc = tau_ * kappa_;
        for (int b = 0; b < nb_; ++b) acc += (X_[b].array() * S_[b].array()).sum();
        return acc / (nu_ + 1);
    }

    double xs_inner() const {
        double acc = 0.0;
        for (int b = 0; b < nb_; ++b) acc += (X_[b].array() * S_[b].array()).sum();
        return acc;
    }

    void compute_residuals() {
        // r_p[k] = -<F_k, X> - b_k tau
        for (int k = 0; k < m_; ++k) {
            double acc = 0.0;
            for (int b = 0; b < nb_; ++b) acc += sparse_dot(p_.variables[k].blocks[b], X_[b]);
            rp_[k] = -acc - b_vec_[k] * tau_;
        }
        // R_d = sum_k y_k F_k - S + F0 tau
        for (int b = 0; b < nb_; ++b) {
            Rd_[b] = -S_[b];
            add_sparse(Rd_[b], p_.constant.blocks[b], tau_);
            for (int k = 0; k < m_; ++k) add_sparse(Rd_[b], p_.variables[k].blocks[b], y_[k]);
        }
        // r_g = b.y - <F0, X> - kappa
        double cx = 0.0;
        for (int b = 0; b < nb_; ++b) cx += sparse_dot(p_.constant.blocks[b], X_[b]);
        cx_ = cx;
        rg_ = b_vec_.dot(y_) - cx - kappa_;
    }

    void report(int it, double muv, const Metrics& met) {
        if (!opts_.iterate_callback) return;
        SdpIterate info;
        info.iteration = it;
        info.mu = muv;
        info.tau = tau_;
        info.kappa = kappa_;
        info.primal_objective = met.pobj;
        info.dual_objective = met.dobj;
        info.primal_residual = met.rp_rel;
        info.dual_residual = met.rd_rel;
        info.complementarity = xs_inner();
        opts_.iterate_callback(info);
    }

    double dual_residual() const {
        double acc = 0.0;
        for (int b = 0; b < nb_; ++b) acc = std::max(acc, Rd_[b].lpNorm<Eigen::Infinity>());
        return acc / norm_c_;
    }

    bool check_optimal(const Metrics& met, SdpOutcome& out, int it) {
        if (met.rp_rel <= opts_.tol_feas && met.rd_rel <= opts_.tol_feas &&
            met.gap <= opts_.tol_gap * met.gap_scale &&
            met.compl_rel <= 10 * opts_.tol_gap * met.gap_scale) {
            out.status = SdpStatus::Optimal;
            out.objective = met.dobj;
            out.z.resize(m_);
            for (int k = 0; k < m_; ++k) out.z[k] = y_[k] / tau_;
            out.dual_blocks.resize(nb_);
            for (int b = 0; b < nb_; ++b) out.dual_blocks[b] = X_[b] / tau_;
            out.stats.iterations = it;
            out.stats.primal_residual = met.rp_rel;
            out.stats.dual_residual = met.rd_rel;
            out.stats.gap = met.gap;
            out.stats.mu_final = mu();
            return true;
        }
        return false;
    }

    bool check_infeasible(SdpOutcome& out, int it) {
        if (kappa_ < 10.0 * tau_) return false;
        double tr = 0.0;
        for (int b = 0; b < nb_; ++b) tr += X_[b].trace();
        if (tr <= 0.0) return false;
        double viol = 0.0; // -<F0, X>/tr
        for (int b = 0; b < nb_; ++b) viol -= sparse_dot(p_.constant.blocks[b], X_[b]);
        viol /= tr;
        if (viol < 1e-8 * norm_c_) return false;
        for (int k = 0; k < m_; ++k) {
            double acc = 0.0;
            double scale = 1.0;
            for (int b = 0; b < nb_; ++b) {
                acc += sparse_dot(p_.variables[k].blocks[b], X_[b]);
                scale = std::max(scale, frob_norm_sparse(p_.variables[k].blocks[b]));
            }
            if (std::abs(acc / tr) > 1e-9 * scale + 1e-6 * viol) return false;
        }
        out.status = SdpStatus::Infeasible;
        out.dual_blocks.resize(nb_);
        for (int b = 0; b < nb_; ++b) out.dual_blocks[b] = X_[b] / tr;
        out.cert_margin = viol;
        out.stats.iterations = it;
        out.stats.mu_final = mu();
        return true;
    }

    bool check_unbounded(SdpOutcome& out, int it) {
        if (kappa_ < 10.0 * tau_) return false;
        const double by = b_vec_.dot(y_);
        if (by < 1e-8 * norm_b_) return false;
        // S_ray = sum (y_k / by) F_k must be PSD up to tolerance
        double min_eig = 0.0;
        for (int b = 0; b < nb_; ++b) {
            Eigen::MatrixXd Sray = Eigen::MatrixXd::Zero(p_.block_sizes[b], p_.block_sizes[b]);
            for (int k = 0; k < m_; ++k) add_sparse(Sray, p_.variables[k].blocks[b], y_[k] / by);
            if (Sray.rows() > 0) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sray,
                                                                  Eigen::EigenvaluesOnly);
                min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
            }
        }
        if (min_eig < -1e-9) return false;
        out.status = SdpStatus::Unbounded;
        out.ray.resize(m_);
        for (int k = 0; k < m_; ++k) out.ray[k] = y_[k] / by;
        out.stats.iterations = it;
        out.stats.mu_final = mu();
        return true;
    }

    /// NT scaling point per block and the cached congruences W F W.
    bool factorize() {
        for (int b = 0; b < nb_; ++b) {
            Eigen::LLT<Eigen::MatrixXd> lltx(X_[b]);
            Eigen::MatrixXd Lx;
            if (lltx.info() == Eigen::Success) {
                Lx = lltx.matrixL();
            } else {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X_[b]);
                if (es.info() != Eigen::Success) return false;
                Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-14 * (1.0 + X_[b].trace()));
                Lx = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
            }
            Eigen::MatrixXd Msc = Lx.transpose() * S_[b] * Lx;
            Msc = 0.5 * (Msc + Msc.transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Msc);
            if (es.info() != Eigen::Success) return false;
            const double floor = 1e-16 * (1.0 + Msc.trace());
            Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
            Eigen::MatrixXd Q = Lx * es.eigenvectors();
            W_[b] = Q * ev.cwiseInverse().cwiseSqrt().asDiagonal() * Q.transpose();
            W_[b] = 0.5 * (W_[b] + W_[b].transpose());
        }
        // cache T(F_k) = W F_k W and T(F0)
        for (int b = 0; b < nb_; ++b) {
            Eigen::MatrixXd Fd = Eigen::MatrixXd::Zero(p_.block_sizes[b], p_.block_sizes[b]);
            add_sparse(Fd, p_.constant.blocks[b], 1.0);
            TF0_[b] = W_[b] * Fd * W_[b];
            for (int k = 0; k < m_; ++k) {
                Fd.setZero();
                add_sparse(Fd, p_.variables[k].blocks[b], 1.0);
                TF_[k][b] = W_[b] * Fd * W_[b];
            }
        }
        // Schur complement M_kl = sum_b <F_k, T(F_l)>
        M_.resize(m_, m_);
        for (int k = 0; k < m_; ++k)
            for (int l = k; l < m_; ++l) {
                double acc = 0.0;
                for (int b = 0; b < nb_; ++b) acc += sparse_dot(p_.variables[k].blocks[b], TF_[l][b]);
                M_(k, l) = acc;
                M_(l, k) = acc;
            }
        // h_k = -<F_k, T(F0)>
        h_.resize(m_);
        for (int k = 0; k < m_; ++k) {
            double acc = 0.0;
            for (int b = 0; b < nb_; ++b) acc += sparse_dot(p_.variables[k].blocks[b], TF0_[b]);
            h_[k] = -acc;
        }
        cc_ = 0.0;
        for (int b = 0; b < nb_; ++b) cc_ += sparse_dot(p_.constant.blocks[b], TF0_[b]);

        const double reg0 = M_.diagonal().cwiseAbs().maxCoeff();
        for (int attempt = 0; attempt < 4; ++attempt) {
            Eigen::MatrixXd Mreg = M_;
            if (attempt > 0)
                Mreg.diagonal().array() += std::pow(10.0, attempt - 15) * std::max(1.0, reg0);
            mllt_.compute(Mreg);
            if (mllt_.info() == Eigen::Success) return true;
        }
        return false;
    }

    bool direction(double target, double tau_corr, Dir& d) {
        d.dX.assign(nb_, Eigen::MatrixXd());
        d.dS.assign(nb_, Eigen::MatrixXd());

        // D = target * X^{-1} - S ; G1 = D - R_d
        std::vector<Eigen::MatrixXd> G1(nb_);
        for (int b = 0; b < nb_; ++b) {
            Eigen::MatrixXd D = -S_[b];
            if (target != 0.0) {
                Eigen::LLT<Eigen::MatrixXd> llt(X_[b]);
                if (llt.info() != Eigen::Success) return false;
                D += target *
                     llt.solve(Eigen::MatrixXd::Identity(p_.block_sizes[b], p_.block_sizes[b]));
            }
            G1[b] = D - Rd_[b];
        }

        // rhs_I = -r_p + [<F_k, T(G1)>]_k ; solve M y0 = rhs_I, M y1 = b + h
        Eigen::VectorXd rhsI(m_);
        std::vector<Eigen::MatrixXd> TG1(nb_);
        for (int b = 0; b < nb_; ++b) TG1[b] = W_[b] * G1[b] * W_[b];
        for (int k = 0; k < m_; ++k) {
            double acc = 0.0;
            for (int b = 0; b < nb_; ++b) acc += sparse_dot(p_.variables[k].blocks[b], TG1[b]);
            rhsI[k] = -rp_[k] + acc;
        }
        const Eigen::VectorXd y0 = mllt_.solve(rhsI);
        const Eigen::VectorXd y1 = mllt_.solve(b_vec_ + h_);

        double cg1 = 0.0;
        for (int b = 0; b < nb_; ++b) cg1 += sparse_dot(p_.constant.blocks[b], TG1[b]);

        const double rhs5 = target - tau_ * kappa_ - tau_corr;
        const Eigen::VectorXd bh = b_vec_ - h_;
        const double den = bh.dot(y1) + cc_ + kappa_ / tau_;
        const double num = -rg_ + cg1 + rhs5 / tau_ - bh.dot(y0);
        if (den == 0.0 || !std::isfinite(den) || !std::isfinite(num)) return false;
        d.dtau = num / den;
        d.dy = y0 + d.dtau * y1;
        d.dkappa = (rhs5 - kappa_ * d.dtau) / tau_;

        for (int b = 0; b < nb_; ++b) {
            Eigen::MatrixXd inner = G1[b];
            add_sparse(inner, p_.constant.blocks[b], -d.dtau);
            for (int k = 0; k < m_; ++k) add_sparse(inner, p_.variables[k].blocks[b], -d.dy[k]);
            d.dX[b] = W_[b] * inner * W_[b];
            d.dX[b] = 0.5 * (d.dX[b] + d.dX[b].transpose());
            // dS = R_d + sum dy_k F_k + F0 dtau
            d.dS[b] = Rd_[b];
            add_sparse(d.dS[b], p_.constant.blocks[b], d.dtau);
            for (int k = 0; k < m_; ++k) add_sparse(d.dS[b], p_.variables[k].blocks[b], d.dy[k]);
            d.dS[b] = 0.5 * (d.dS[b] + d.dS[b].transpose());
        }
        return true;
    }

    static double block_step(const Eigen::MatrixXd& P, const Eigen::MatrixXd& dP) {
        Eigen::LLT<Eigen::MatrixXd> llt(P);
        if (llt.info() != Eigen::Success) return 0.0;
        const Eigen::MatrixXd L = llt.matrixL();
        Eigen::MatrixXd Mid = L.triangularView<Eigen::Lower>().solve(dP);
        Mid = L.triangularView<Eigen::Lower>().solve(Mid.transpose()).transpose();
        Mid = 0.5 * (Mid + Mid.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Mid, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
        return -1.0 / lmin;
    }

    double step_length(const Dir& d) const {
        double a = std::numeric_limits<double>::infinity();
        for (int b = 0; b < nb_; ++b) {
            a = std::min(a, block_step(X_[b], d.dX[b]));
            a = std::min(a, block_step(S_[b], d.dS[b]));
        }
        if (d.dtau < 0.0) a = std::min(a, -tau_ / d.dtau);
        if (d.dkappa < 0.0) a = std::min(a, -kappa_ / d.dkappa);
        return a;
    }

    double mu_after(const Dir& d, double alpha) const {
        double acc = (tau_ + alpha * d.dtau) * (kappa_ + alpha * d.dkappa);
        for (int b = 0; b < nb_; ++b)
            acc += ((X_[b] + alpha * d.dX[b]).array() * (S_[b] + alpha * d.dS[b]).array()).sum();
        return acc / (nu_ + 1);
    }

    void fill_stats(SdpOutcome& out) {
        out.stats.iterations = opts_.max_iterations;
        out.stats.primal_residual = rp_.lpNorm<Eigen::Infinity>() / (tau_ * norm_b_);
        out.stats.dual_residual = dual_residual() / tau_;
        out.stats.gap = std::abs(cx_ / tau_ - b_vec_.dot(y_) / tau_);
        out.stats.mu_final = mu();
    }

    const SdpProblem& p_;
    SdpOptions opts_;
    int nb_ = 0, m_ = 0, nu_ = 0;
    Eigen::VectorXd b_vec_;
    double norm_b_ = 1.0, norm_c_ = 1.0;

    std::vector<Eigen::MatrixXd> X_, S_, Rd_, W_, TF0_;
    std::vector<std::vector<Eigen::MatrixXd>> TF_;
    Eigen::VectorXd y_, rp_, h_;
    Eigen::MatrixXd M_;
    Eigen::LLT<Eigen::MatrixXd> mllt_;
    double tau_ = 1.0, kappa_ = 1.0, rg_ = 0.0, cx_ = 0.0, cc_ = 0.0;
};

} // namespace detail

/// Adds the margin variable t: maximize t s.t. Gamma(y) - t I >= 0, t <= 1.
/// The augmented problem is strictly feasible and bounded, so the solver
/// always lands on Optimal and the sign of t* decides feasibility of the
/// original LMI; the optimal dual matrices restricted to the original blocks
/// are a trace-normalized Farkas certificate when t* < 0.
inline SdpProblem augment_with_margin(const SdpProblem& p) {
    SdpProblem q = p;
    const std::size_t nb = p.block_sizes.size();
    q.block_sizes.push_back(1);
    q.constant.blocks.push_back({SdpTriplet{0, 0, 1.0}});
    for (auto& v : q.variables) v.blocks.emplace_back();
    SdpMatrix t_mat;
    t_mat.blocks.resize(nb + 1);
    for (std::size_t b = 0; b < nb; ++b)
        for (int i = 0; i < p.block_sizes[b]; ++i) t_mat.blocks[b].push_back({i, i, -1.0});
    t_mat.blocks[nb].push_back({0, 0, -1.0});
    q.variables.push_back(std::move(t_mat));
    q.objective.assign(q.variables.size(), 0.0);
    q.objective.back() = 1.0;
    q.var_names.push_back("margin");
    return q;
}

/// Solves the block-diagonal SDP. Pure feasibility problems are routed
/// through the margin augmentation; everything else is solved directly.
/// Deterministic: identical problems give identical outcomes.
inline SdpOutcome solve(const SdpProblem& problem, const SdpOptions& options = {}) {
    problem.validate();
    if (!problem.is_feasibility()) {
        SdpOutcome out = detail::HsdSolver(problem, options).solve();
        return out;
    }
    const SdpProblem aug = augment_with_margin(problem);
    SdpOutcome raw = detail::HsdSolver(aug, options).solve();
    SdpOutcome out;
    out.stats = raw.stats;
    if (raw.status != SdpStatus::Optimal) {
        out.status = SdpStatus::NumericalFailure;
        return out;
    }
    const double t_star = raw.objective;
    out.feas_margin = t_star;
    out.objective = t_star;
    out.z.assign(raw.z.begin(), raw.z.end() - 1);
    out.dual_blocks.assign(raw.dual_blocks.begin(), raw.dual_blocks.end() - 1);
    if (t_star <= options.infeasible_margin) {
        out.status = SdpStatus::Infeasible;
        double tr = 0.0;
        for (const auto& blk : out.dual_blocks) tr += blk.trace();
        if (tr > 0.0)
            for (auto& blk : out.dual_blocks) blk /= tr;
        double viol = 0.0;
        for (std::size_t b = 0; b < problem.block_sizes.size(); ++b)
            viol -= detail::sparse_dot(problem.constant.blocks[b], out.dual_blocks[b]);
        out.cert_margin = viol;
        return out;
    }
    out.status = SdpStatus::Optimal;
    return out;
}

} // namespace bellcert
