#pragma once

#include "bellcert/moment.hpp"
#include "bellcert/polytope.hpp"
#include "bellcert/sdp.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace bellcert {

/// One template build + assembly + solve, kept together so the dual objects
/// can be mapped back to moment space afterwards.
struct SolveRun {
    MomentTemplate tpl;
    SdpProblem problem;
    SdpOutcome outcome;
};

struct EngineOptions {
    int mu = 1;
    bool shared = false;
    bool conditioned = true;
    SdpOptions sdp;
};

inline SolveRun run_lambda_max(long long n, const std::vector<PointConstraint>& constraints,
                               const EngineOptions& opts = {}) {
    SolveRun run;
    run.tpl = build_template(opts.mu, n, opts.shared);
    if (opts.conditioned) run.tpl = condition_template(run.tpl);
    run.problem = assemble_lambda_max(run.tpl, constraints);
    run.outcome = solve(run.problem, opts.sdp);
    return run;
}

inline SolveRun run_feasibility(long long n, const std::vector<PointConstraint>& constraints,
                                const EngineOptions& opts = {}) {
    SolveRun run;
    run.tpl = build_template(opts.mu, n, opts.shared);
    if (opts.conditioned) run.tpl = condition_template(run.tpl);
    run.problem = assemble_feasibility(run.tpl, constraints);
    run.outcome = solve(run.problem, opts.sdp);
    return run;
}

/// Full primal point: y value per template monomial, reconstructed from the
/// solver variables and unscaled back through the conditioning.
inline std::map<Monomial, double> primal_point(const SdpProblem& p, const SdpOutcome& o) {
    if (!p.meta) throw std::invalid_argument("primal_point: problem carries no metadata");
    const auto& meta = *p.meta;
    std::map<Monomial, double> y;
    for (std::size_t j = 0; j < meta.y_index.size(); ++j) {
        double yhat = meta.recon_const[j];
        for (const auto& [var, coef] : meta.recon_rows[j]) yhat += coef * o.z[var];
        y[meta.y_index[j]] = yhat / meta.scaling[j];
    }
    return y;
}

struct ExtractionInfo {
    /// Raw dual pairings <X, Gamma_j> for [1, S0, S1, S00, S01, S11] in
    /// conditioned coordinates.
    std::array<double, 6> raw{};
    /// Relative residual of the correlator pairings outside the span of the
    /// fixing functionals.
    double span_residual = 0.0;
    /// Multiplier per fixing functional, after normalization.
    std::vector<double> functional_multipliers;
    double scale = 1.0;
    std::string normalization;
};

/// Bell inequality from the dual multipliers of the functional fixings: the
/// pairing of the optimal dual matrices with the coefficient matrices of y_0
/// and the five correlators, mapped back through the conditioning scaling.
/// For lambda runs the result is normalized to decrease at unit rate along
/// the query ray and to evaluate to exactly 0 at the boundary point
/// lambda* . (direction values).
inline BellInequality extract_bell_inequality(const SolveRun& run,
                                              ExtractionInfo* info_out = nullptr) {
    const auto& p = run.problem;
    const auto& o = run.outcome;
    if (!p.meta) throw std::invalid_argument("extract: problem carries no metadata");
    if (o.dual_blocks.empty()) throw std::invalid_argument("extract: outcome has no dual blocks");
    const auto& meta = *p.meta;

    ExtractionInfo info;
    for (int c = 0; c < 6; ++c) {
        double acc = 0.0;
        for (std::size_t b = 0; b < o.dual_blocks.size() && b < p.block_sizes.size(); ++b)
            acc += detail::sparse_dot(meta.extraction_mats[c].blocks[b], o.dual_blocks[b]);
        info.raw[c] = acc;
    }

    // At an exact optimum the correlator pairings lie in the span of the
    // fixing rows: q_c = sum_r a_r W_rc. Projecting strips solver noise.
    const Eigen::Index nr = static_cast<Eigen::Index>(meta.fixing_rows.size());
    Eigen::VectorXd q(5);
    for (int c = 0; c < 5; ++c) q[c] = info.raw[c + 1];
    Eigen::VectorXd qproj = q;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(nr);
    bool on_span = false;
    if (nr > 0) {
        Eigen::MatrixXd Wf(5, nr);
        for (Eigen::Index r = 0; r < nr; ++r)
            for (int c = 0; c < 5; ++c) Wf(c, r) = meta.fixing_rows[r][c];
        a = Wf.colPivHouseholderQr().solve(q);
        info.span_residual = (q - Wf * a).norm() / std::max(1e-300, q.norm());
        on_span = info.span_residual <= 1e-3;
        if (on_span) qproj = Wf * a;
    }

    double beta = info.raw[0];
    double scale = 1.0;
    info.normalization = "raw dual scale";
    if (meta.lambda_mode && o.status == SdpStatus::Optimal && on_span) {
        // dB/dlambda along the ray; negative for a separating dual.
        double rate = 0.0;
        for (Eigen::Index r = 0; r < nr; ++r) rate += a[r] * meta.fixing_values[r];
        if (rate < 0.0) {
            scale = -1.0 / rate;
            qproj *= scale;
            a *= scale;
            beta = o.objective; // B(lambda) = lambda* - lambda, zero at the boundary
            info.normalization =
                "unit decrease per unit lambda along the query ray; zero at the boundary point";
        }
    }

    BellInequality ineq;
    for (int c = 0; c < 5; ++c)
        ineq.alpha[c] = rational_of(qproj[c] * meta.extraction_scaling[c + 1]);
    ineq.beta_c = rational_of(beta);
    if (info_out) {
        info.functional_multipliers.assign(a.data(), a.data() + a.size());
        info.scale = scale;
        *info_out = info;
    }
    return ineq;
}

struct ValidationReport {
    bool pass = false;
    double max_residual = 0.0;       // max |coefficient| of the residual polynomial
    double relative_residual = 0.0;  // against the largest recomposed coefficient
    Polynomial recomposed;           // sum_i g_i sigma_i mod I at the inequality's scale
};

/// Recomposes l = sum_i g_i sigma_i mod I from the dual PSD blocks by
/// independent polynomial arithmetic (sigma_i = b^T G_i b with G_i the
/// unconditioned Gram of block i) and reports the coefficient deviation from
/// the extracted inequality.
inline ValidationReport validate_certificate(const BellInequality& ineq, const SolveRun& run) {
    const auto& t = run.tpl;
    const auto& o = run.outcome;
    ValidationReport rep;
    if (o.dual_blocks.size() != t.blocks.size()) return rep;

    ExtractionInfo info;
    extract_bell_inequality(run, &info);
    const double scale = info.scale;

    const TriangularIdeal ideal = TriangularIdeal::correlator_ideal(t.n);
    const Rational nr(t.n);
    Polynomial total;
    for (std::size_t i = 0; i < t.blocks.size(); ++i) {
        const Eigen::MatrixXd& X = o.dual_blocks[i];
        Polynomial sigma;
        const int bs = static_cast<int>(t.basis.size());
        for (int a = 0; a < bs; ++a)
            for (int b = a; b < bs; ++b) {
                const double raw = 0.5 * (X(a, b) + X(b, a)) * (a == b ? 1.0 : 2.0);
                if (raw == 0.0) continue;
                Rational g = rational_of(raw) * t.block_scale *
                             rational_pow(nr, -t.basis[a].nat_degree()) *
                             rational_pow(nr, -t.basis[b].nat_degree());
                sigma += Polynomial::term(t.basis[a] * t.basis[b], g);
            }
        total += ideal.reduce(t.multipliers[i] * sigma);
    }
    total *= rational_of(scale);
    rep.recomposed = total;

    Polynomial target = Polynomial::constant(ineq.beta_c);
    for (int c = 0; c < 5; ++c) target += Polynomial::term(Monomial::variable(c), ineq.alpha[c]);

    double max_coef = 1.0;
    for (const auto& [m, c] : total.terms()) max_coef = std::max(max_coef, std::abs(to_double(c)));
    const Polynomial resid = total - target;
    for (const auto& [m, c] : resid.terms())
        rep.max_residual = std::max(rep.max_residual, std::abs(to_double(c)));
    rep.relative_residual = rep.max_residual / max_coef;
    rep.pass = rep.relative_residual <= 1e-6;
    return rep;
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

enum class Verdict { Nonlocal, NoViolationAtThisLevel, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Nonlocal: return "nonlocal";
        case Verdict::NoViolationAtThisLevel: return "no-violation-at-this-level";
        default: return "inconclusive";
    }
}

/// Nonlocality is declared only from lambda* < 1 - 1e-6 or an infeasibility
/// certificate with sufficient margin; borderline is Inconclusive so the
/// method's one-sided soundness survives floating point.
inline constexpr double kLambdaNonlocalThreshold = 1.0 - 1e-6;

struct CertifyResult {
    Verdict verdict = Verdict::Inconclusive;
    std::optional<double> lambda_max;
    std::optional<BellInequality> inequality;
    std::string normalization_note;
    SdpStatus solver_status = SdpStatus::NumericalFailure;
    SdpStats stats;
    double margin = std::numeric_limits<double>::quiet_NaN();
    bool used_bisection = false;
    SolveRun run;
};

namespace detail {

/// Bisection on the feasibility SDP along the query ray (anchored at the
/// zero-correlator point, which always admits a completion). Used when the
/// direct lambda solve fails or is unbounded.
inline double bisect_lambda(long long n, const std::vector<PointConstraint>& constraints,
                            const EngineOptions& opts, double lo, double hi) {
    auto feasible_at = [&](double lam) {
        std::vector<PointConstraint> fixed = constraints;
        for (auto& c : fixed) c.value *= rational_of(lam);
        SolveRun r = run_feasibility(n, fixed, opts);
        return r.outcome.status == SdpStatus::Optimal &&
               r.outcome.feas_margin >= opts.sdp.feasible_margin;
    };
    if (!feasible_at(lo)) return std::numeric_limits<double>::quiet_NaN();
    while (feasible_at(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) return std::numeric_limits<double>::infinity();
    }
    for (int it = 0; it < 50 && (hi - lo) > 1e-9 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible_at(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

inline CertifyResult certify_lambda(long long n, const std::vector<PointConstraint>& constraints,
                                    const EngineOptions& opts = {}) {
    CertifyResult res;
    res.run = run_lambda_max(n, constraints, opts);
    res.solver_status = res.run.outcome.status;
    res.stats = res.run.outcome.stats;
    switch (res.run.outcome.status) {
        case SdpStatus::Optimal: {
            const double lam = res.run.outcome.objective;
            res.lambda_max = lam;
            if (lam < kLambdaNonlocalThreshold) {
                res.verdict = Verdict::Nonlocal;
                ExtractionInfo info;
                res.inequality = extract_bell_inequality(res.run, &info);
                res.normalization_note = info.normalization;
            } else if (lam >= 1.0) {
                res.verdict = Verdict::NoViolationAtThisLevel;
            } else {
                res.verdict = Verdict::Inconclusive;
            }
            return res;
        }
        case SdpStatus::Infeasible:
            // no completion anywhere on the ray, including lambda = 0
            res.verdict = Verdict::Inconclusive;
            return res;
        case SdpStatus::Unbounded:
        case SdpStatus::NumericalFailure:
        default: {
            // fall back: feasibility at the query point itself, then bisect
            // along the segment from the (always completable) zero point.
            res.used_bisection = true;
            SolveRun at_point = run_feasibility(n, constraints, opts);
            res.solver_status = at_point.outcome.status;
            res.stats = at_point.outcome.stats;
            res.margin = at_point.outcome.feas_margin;
            const double lam =
                detail::bisect_lambda(n, constraints, opts, 0.0, 1.0);
            if (std::isfinite(lam)) res.lambda_max = lam;
            if (at_point.outcome.status == SdpStatus::Infeasible) {
                res.verdict = Verdict::Nonlocal;
                ExtractionInfo info;
                res.inequality = extract_bell_inequality(at_point, &info);
                res.normalization_note = "raw dual scale (bisection fallback)";
                res.run = std::move(at_point);
            } else if (at_point.outcome.status == SdpStatus::Optimal &&
                       at_point.outcome.feas_margin >= opts.sdp.feasible_margin) {
                res.verdict = Verdict::NoViolationAtThisLevel;
                res.run = std::move(at_point);
            } else {
                res.verdict = Verdict::Inconclusive;
            }
            return res;
        }
    }
}

inline CertifyResult certify_feasibility(long long n,
                                         const std::vector<PointConstraint>& constraints,
                                         const EngineOptions& opts = {}) {
    CertifyResult res;
    res.run = run_feasibility(n, constraints, opts);
    res.solver_status = res.run.outcome.status;
    res.stats = res.run.outcome.stats;
    res.margin = res.run.outcome.feas_margin;
    switch (res.run.outcome.status) {
        case SdpStatus::Infeasible: {
            res.verdict = Verdict::Nonlocal;
            ExtractionInfo info;
            res.inequality = extract_bell_inequality(res.run, &info);
            res.normalization_note = "raw dual scale (Farkas certificate)";
            return res;
        }
        case SdpStatus::Optimal:
            res.verdict = res.run.outcome.feas_margin >= opts.sdp.feasible_margin
                              ? Verdict::NoViolationAtThisLevel
                              : Verdict::Inconclusive;
            return res;
        default:
            res.verdict = Verdict::Inconclusive;
            return res;
    }
}

// ---------------------------------------------------------------------------
// Boundary scan
// ---------------------------------------------------------------------------

struct ScanRow {
    double theta = 0.0;
    double lambda_sdp = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> r_hull;
    std::optional<BellInequality> inequality;
    double validation_residual = std::numeric_limits<double>::quiet_NaN();
};

struct ScanOptions {
    EngineOptions engine;
    int rays = 360;
    int threads = 1;
    bool with_hull = true;
    bool validate_certificates = false;
};

/// lambda-max along uniformly spaced rays of the plane spanned by two
/// functionals, with the polytope radial function alongside when the vertex
/// budget allows. Workers share only the immutable template.
inline std::vector<ScanRow> scan_boundary(long long n, const LinearFunctional& f1,
                                          const LinearFunctional& f2, const ScanOptions& opts) {
    MomentTemplate tpl = build_template(opts.engine.mu, n, opts.engine.shared);
    if (opts.engine.conditioned) tpl = condition_template(tpl);

    std::optional<ProjectedPolygon> poly;
    if (opts.with_hull) poly = project_2d(n, f1, f2);

    std::vector<ScanRow> rows(opts.rays);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < opts.rays; i = next.fetch_add(1)) {
            const double theta = 2.0 * std::numbers::pi * i / opts.rays;
            ScanRow& row = rows[i];
            row.theta = theta;
            std::vector<PointConstraint> cs(2);
            cs[0].coeffs = f1.coeffs;
            cs[0].value = rational_of(std::cos(theta));
            cs[1].coeffs = f2.coeffs;
            cs[1].value = rational_of(std::sin(theta));
            SolveRun run;
            run.tpl = tpl; // shared immutable copy semantics
            run.problem = assemble_lambda_max(tpl, cs);
            run.outcome = solve(run.problem, opts.engine.sdp);
            if (run.outcome.status == SdpStatus::Optimal) {
                row.lambda_sdp = run.outcome.objective;
                if (opts.validate_certificates) {
                    ExtractionInfo info;
                    row.inequality = extract_bell_inequality(run, &info);
                    row.validation_residual =
                        validate_certificate(*row.inequality, run).relative_residual;
                }
            }
            if (poly) row.r_hull = polygon_radial(*poly, theta);
        }
    };
    if (opts.threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < opts.threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Classical bound of a user inequality
// ---------------------------------------------------------------------------

struct BoundReport {
    Rational minimum;        // min over vertices of alpha.S + offset
    bool tight = false;      // minimum == 0 exactly
    StrategyCounts argmin{};
};

inline BoundReport bound_inequality(const Correlators& alpha, const Rational& offset, long long n,
                                    int threads = 1) {
    BoundReport rep;
    const BoundResult r = classical_bound_ex(alpha, n, threads);
    rep.minimum = r.minimum + offset;
    rep.argmin = r.argmin;
    rep.tight = rep.minimum == 0;
    return rep;
}

} // namespace bellcert
