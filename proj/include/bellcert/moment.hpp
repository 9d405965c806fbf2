#pragma once

#include "bellcert/polytope.hpp"
#include "bellcert/quotient.hpp"
#include "bellcert/sdp.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bellcert {

struct RationalTriplet {
    int row = 0; // row <= col
    int col = 0;
    Rational value;
};

/// Linearized moment block: entry (a, b) equals sum_j coeff[j](a, b) * y_j
/// over the y_index monomials of the owning template.
struct MomentBlock {
    int size = 0;
    std::vector<std::vector<RationalTriplet>> coeff;
};

/// The symbolic block-diagonal moment matrix at level mu: one block per
/// multiplier polynomial (g_0 = 1 plus the four strategy-count polynomials;
/// a single summed block when the multipliers are tied), linearized over the
/// normal-form monomials occurring in any entry.
///
/// Conditioned templates rescale monomial j by N^{-nat_degree(j)} (one-body
/// correlators scale as N, two-body as N^2), which is a diagonal congruence
/// of each block plus a harmless uniform block scale, so positive
/// semidefiniteness is preserved in both directions.
struct MomentTemplate {
    int mu = 1;
    long long n = 0;
    bool shared = false;
    bool conditioned = false;
    std::vector<Monomial> basis;
    std::vector<Polynomial> multipliers; // g polynomial per block
    std::vector<Monomial> y_index;       // [0] is the constant monomial
    std::map<Monomial, int> y_pos;
    std::vector<MomentBlock> blocks;
    std::vector<Rational> scaling; // yhat_j = scaling_j * y_j
    Rational block_scale = 1;

    int position_of(const Monomial& m) const {
        auto it = y_pos.find(m);
        return it == y_pos.end() ? -1 : it->second;
    }
};

/// A fixing of one linear functional of the observable correlators:
/// sum_c coeffs_c * y_c = value.
struct PointConstraint {
    Correlators coeffs;
    Rational value;

    static PointConstraint fix(int correlator, const Rational& v) {
        PointConstraint c;
        c.coeffs[correlator] = 1;
        c.value = v;
        return c;
    }
};

inline MomentTemplate build_template(int mu, long long n, bool shared = false) {
    if (mu < 1 || mu > 2) throw std::invalid_argument("build_template: mu must be 1 or 2");
    if (n < 2) throw std::invalid_argument("build_template: N must be >= 2");
    MomentTemplate t;
    t.mu = mu;
    t.n = n;
    t.shared = shared;
    t.basis = quotient_basis(mu);
    const TriangularIdeal ideal = TriangularIdeal::correlator_ideal(n);

    std::vector<Polynomial> gs;
    gs.push_back(Polynomial::constant(1));
    for (const auto& g : constraint_polynomials(n)) gs.push_back(g);
    if (shared) {
        Polynomial sum;
        for (const auto& g : gs) sum += g;
        t.multipliers = {sum};
    } else {
        t.multipliers = gs;
    }

    const int bsize = static_cast<int>(t.basis.size());
    std::vector<std::vector<std::vector<Polynomial>>> entries(t.multipliers.size());
    std::set<Monomial> mons;
    for (std::size_t i = 0; i < t.multipliers.size(); ++i) {
        entries[i].assign(bsize, std::vector<Polynomial>(bsize));
        for (int a = 0; a < bsize; ++a)
            for (int b = a; b < bsize; ++b) {
                Polynomial e = ideal.reduce(t.multipliers[i] *
                                            Polynomial::term(t.basis[a] * t.basis[b], 1));
                for (const auto& [m, c] : e.terms()) mons.insert(m);
                entries[i][a][b] = std::move(e);
            }
    }
    t.y_index.assign(mons.begin(), mons.end()); // set iterates in monomial order
    if (t.y_index.empty() || !t.y_index.front().is_constant())
        throw std::logic_error("build_template: constant monomial missing");
    for (std::size_t j = 0; j < t.y_index.size(); ++j)
        t.y_pos.emplace(t.y_index[j], static_cast<int>(j));

    t.blocks.resize(t.multipliers.size());
    for (std::size_t i = 0; i < t.multipliers.size(); ++i) {
        t.blocks[i].size = bsize;
        t.blocks[i].coeff.assign(t.y_index.size(), {});
        for (int a = 0; a < bsize; ++a)
            for (int b = a; b < bsize; ++b)
                for (const auto& [m, c] : entries[i][a][b].terms())
                    t.blocks[i].coeff[t.y_pos[m]].push_back({a, b, c});
    }
    t.scaling.assign(t.y_index.size(), Rational(1));
    return t;
}

/// Diagonal conditioning: monomial j rescaled by N^{-nat_degree(j)}, blocks
/// conjugated by diag(N^{-nat_degree(basis_a)}) and uniformly scaled by 1/N.
inline MomentTemplate condition_template(const MomentTemplate& in) {
    MomentTemplate t = in;
    t.conditioned = true;
    t.block_scale = Rational(1, in.n);
    const Rational nr(in.n);
    for (std::size_t j = 0; j < t.y_index.size(); ++j)
        t.scaling[j] = rational_pow(nr, -t.y_index[j].nat_degree());
    for (auto& block : t.blocks) {
        for (std::size_t j = 0; j < block.coeff.size(); ++j) {
            const long long kj = t.y_index[j].nat_degree();
            for (auto& trip : block.coeff[j]) {
                const long long power = kj - t.basis[trip.row].nat_degree() -
                                        t.basis[trip.col].nat_degree() - 1;
                trip.value *= rational_pow(nr, power);
            }
        }
    }
    return t;
}

namespace detail {

struct EliminationRow {
    int pivot = -1;                       // y_index position of the pivot monomial
    Rational lambda_coef;                 // yhat_pivot = lambda_coef * lambda + ...
    std::map<int, Rational> free_coefs;   // ... + sum free_coefs[pos] * yhat_pos + ...
    Rational constant;                    // ... + constant
};

/// Gaussian elimination of the fixing constraints over the five observable
/// monomials. Pivots are chosen by largest absolute coefficient, ties by
/// monomial order; lambda (when present) is never pivoted.
inline std::vector<EliminationRow> eliminate_constraints(const MomentTemplate& t,
                                                         const std::vector<PointConstraint>& cs,
                                                         bool lambda_mode) {
    std::array<int, 5> corr_pos{};
    for (int c = 0; c < 5; ++c) {
        corr_pos[c] = t.position_of(Monomial::variable(c));
        if (corr_pos[c] < 0) throw std::logic_error("template lacks a correlator monomial");
    }
    struct Row {
        std::array<Rational, 5> w{};
        Rational lam;  // coefficient of lambda
        Rational rhs;
    };
    std::vector<Row> rows;
    for (const auto& c : cs) {
        Row r;
        bool nonzero = false;
        for (int i = 0; i < 5; ++i) {
            r.w[i] = c.coeffs[i] / t.scaling[corr_pos[i]];
            if (r.w[i] != 0) nonzero = true;
        }
        if (!nonzero) {
            if (lambda_mode)
                throw std::invalid_argument("assemble: zero direction functional");
            if (c.value != 0)
                throw std::invalid_argument("assemble: contradictory constraints");
            continue;
        }
        if (lambda_mode)
            r.lam = -c.value; // w.yhat - value*lambda = 0
        else
            r.rhs = c.value;
        rows.push_back(std::move(r));
    }

    std::vector<EliminationRow> out;
    std::array<bool, 5> used{};
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
        Row& r = rows[ri];
        int piv = -1;
        for (int i = 0; i < 5; ++i) {
            if (used[i] || r.w[i] == 0) continue;
            if (piv < 0 || abs(r.w[i]) > abs(r.w[piv])) piv = i;
        }
        if (piv < 0) {
            if (lambda_mode && r.lam != 0)
                throw std::invalid_argument("assemble: constraints force lambda = 0");
            if (!lambda_mode && r.rhs != 0)
                throw std::invalid_argument("assemble: contradictory constraints");
            continue; // dependent, consistent
        }
        used[piv] = true;
        const Rational p = r.w[piv];
        // yhat_piv = (rhs - lam*lambda - sum_{i != piv} w_i yhat_i)/p
        EliminationRow er;
        er.pivot = corr_pos[piv];
        er.lambda_coef = -r.lam / p;
        er.constant = r.rhs / p;
        for (int i = 0; i < 5; ++i)
            if (i != piv && r.w[i] != 0) er.free_coefs[corr_pos[i]] = -r.w[i] / p;
        // eliminate from remaining rows
        for (std::size_t rj = ri + 1; rj < rows.size(); ++rj) {
            Row& q = rows[rj];
            if (q.w[piv] == 0) continue;
            const Rational f = q.w[piv] / p;
            for (int i = 0; i < 5; ++i) q.w[i] -= f * r.w[i];
            q.lam -= f * r.lam;
            q.rhs -= f * r.rhs;
        }
        // and from earlier pivot expressions
        for (auto& prev : out) {
            auto it = prev.free_coefs.find(corr_pos[piv]);
            if (it == prev.free_coefs.end()) continue;
            const Rational f = it->second;
            prev.free_coefs.erase(it);
            prev.lambda_coef += f * er.lambda_coef;
            prev.constant += f * er.constant;
            for (const auto& [pos, coef] : er.free_coefs) {
                auto [jt, inserted] = prev.free_coefs.emplace(pos, f * coef);
                if (!inserted) {
                    jt->second += f * coef;
                    if (jt->second == 0) prev.free_coefs.erase(jt);
                }
            }
        }
        out.push_back(std::move(er));
    }
    return out;
}

using SymSlots = std::map<std::pair<int, std::pair<int, int>>, Rational>; // (block,(a,b)) -> c

inline void accumulate(SymSlots& dst, const MomentTemplate& t, int mono_pos,
                       const Rational& factor) {
    if (factor == 0) return;
    for (std::size_t b = 0; b < t.blocks.size(); ++b)
        for (const auto& trip : t.blocks[b].coeff[mono_pos]) {
            auto key = std::make_pair(static_cast<int>(b), std::make_pair(trip.row, trip.col));
            auto [it, inserted] = dst.emplace(key, factor * trip.value);
            if (!inserted) {
                it->second += factor * trip.value;
                if (it->second == 0) dst.erase(it);
            }
        }
}

inline SdpMatrix to_sdp_matrix(const SymSlots& slots, std::size_t nblocks) {
    SdpMatrix m;
    m.blocks.resize(nblocks);
    for (const auto& [key, value] : slots)
        m.blocks[key.first].push_back(
            {key.second.first, key.second.second, to_double(value)});
    return m;
}

/// Exact Gaussian elimination over the stacked entry slots: keeps a maximal
/// linearly independent subset of the variable matrices. Needed because
/// distinct high-degree monomials can hit the same entries in proportional
/// patterns, which would make the Schur complement singular.
inline std::vector<bool> independent_columns(const std::vector<SymSlots>& cols) {
    std::map<std::pair<int, std::pair<int, int>>, int> slot_of;
    for (const auto& c : cols)
        for (const auto& [key, value] : c)
            slot_of.emplace(key, static_cast<int>(slot_of.size()));
    const int nslots = static_cast<int>(slot_of.size());
    std::vector<bool> keep(cols.size(), false);
    std::vector<std::vector<std::pair<int, Rational>>> pivots; // sparse reduced rows
    std::vector<int> pivot_slot;
    std::vector<Rational> v(nslots);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        std::fill(v.begin(), v.end(), Rational(0));
        for (const auto& [key, value] : cols[j]) v[slot_of[key]] = value;
        for (std::size_t p = 0; p < pivots.size(); ++p) {
            const Rational& lead = v[pivot_slot[p]];
            if (lead == 0) continue;
            Rational f = lead; // pivot rows are normalized to leading value 1
            for (const auto& [s, val] : pivots[p]) v[s] -= f * val;
        }
        int lead = -1;
        for (int s = 0; s < nslots; ++s)
            if (v[s] != 0) {
                lead = s;
                break;
            }
        if (lead < 0) continue;
        keep[j] = true;
        std::vector<std::pair<int, Rational>> row;
        const Rational norm = v[lead];
        for (int s = lead; s < nslots; ++s)
            if (v[s] != 0) row.emplace_back(s, v[s] / norm);
        pivots.push_back(std::move(row));
        pivot_slot.push_back(lead);
    }
    return keep;
}

} // namespace detail

/// Assembles the level-mu SDP with the given functional fixings applied by
/// variable elimination (pure LMI form, no penalty terms). lambda_mode adds
/// the scalar lambda with each functional fixed to lambda * value and
/// objective max lambda; otherwise the fixings are constants and the
/// objective is zero (pure feasibility).
inline SdpProblem assemble(const MomentTemplate& t, const std::vector<PointConstraint>& cs,
                           bool lambda_mode) {
    const auto elim = detail::eliminate_constraints(t, cs, lambda_mode);
    std::vector<bool> is_pivot(t.y_index.size(), false);
    for (const auto& er : elim) is_pivot[er.pivot] = true;

    const std::size_t nb = t.blocks.size();

    // F0 and (lambda-mode) F_lambda
    detail::SymSlots f0, flam;
    detail::accumulate(f0, t, 0, Rational(1)); // y_0 = 1
    for (const auto& er : elim) {
        detail::accumulate(f0, t, er.pivot, er.constant);
        if (lambda_mode) detail::accumulate(flam, t, er.pivot, er.lambda_coef);
    }

    // free variable columns in deterministic order: lambda first, then the
    // remaining monomials in basis order
    std::vector<detail::SymSlots> cols;
    std::vector<std::string> names;
    std::vector<int> col_mono; // y_index position, -1 for lambda
    if (lambda_mode) {
        cols.push_back(std::move(flam));
        names.push_back("lambda");
        col_mono.push_back(-1);
    }
    for (std::size_t j = 1; j < t.y_index.size(); ++j) {
        if (is_pivot[j]) continue;
        detail::SymSlots col;
        detail::accumulate(col, t, static_cast<int>(j), Rational(1));
        for (const auto& er : elim) {
            auto it = er.free_coefs.find(static_cast<int>(j));
            if (it != er.free_coefs.end()) detail::accumulate(col, t, er.pivot, it->second);
        }
        cols.push_back(std::move(col));
        names.push_back(t.y_index[j].str());
        col_mono.push_back(static_cast<int>(j));
    }

    const std::vector<bool> keep = detail::independent_columns(cols);
    if (lambda_mode && !keep[0])
        throw std::invalid_argument("assemble: degenerate direction (lambda dependent)");

    SdpProblem p;
    p.block_sizes.assign(nb, static_cast<int>(t.basis.size()));
    p.constant = detail::to_sdp_matrix(f0, nb);
    std::vector<int> var_of_col(cols.size(), -1);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (!keep[j]) continue;
        var_of_col[j] = static_cast<int>(p.variables.size());
        p.variables.push_back(detail::to_sdp_matrix(cols[j], nb));
        p.var_names.push_back(names[j]);
        p.objective.push_back(0.0);
    }
    SdpProblem::Meta meta;
    meta.lambda_mode = lambda_mode;
    if (lambda_mode) {
        meta.lambda_var = var_of_col[0];
        p.objective[meta.lambda_var] = 1.0;
    }
    meta.n = t.n;
    meta.mu = t.mu;
    meta.conditioned = t.conditioned;
    meta.shared = t.shared;
    meta.y_index = t.y_index;
    meta.scaling.resize(t.scaling.size());
    for (std::size_t j = 0; j < t.scaling.size(); ++j) meta.scaling[j] = to_double(t.scaling[j]);

    // reconstruction of yhat from z
    meta.recon_const.assign(t.y_index.size(), 0.0);
    meta.recon_rows.assign(t.y_index.size(), {});
    meta.recon_const[0] = 1.0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (col_mono[j] < 0) continue;
        if (var_of_col[j] >= 0) meta.recon_rows[col_mono[j]].push_back({var_of_col[j], 1.0});
        // dropped dependent columns report zero
    }
    for (const auto& er : elim) {
        meta.recon_const[er.pivot] = to_double(er.constant);
        if (lambda_mode && er.lambda_coef != 0 && meta.lambda_var >= 0)
            meta.recon_rows[er.pivot].push_back({meta.lambda_var, to_double(er.lambda_coef)});
        for (const auto& [pos, coef] : er.free_coefs) {
            for (std::size_t j = 0; j < cols.size(); ++j)
                if (col_mono[j] == pos && var_of_col[j] >= 0)
                    meta.recon_rows[er.pivot].push_back({var_of_col[j], to_double(coef)});
        }
    }

    // extraction data: full conditioned matrices for [1, S0, S1, S00, S01, S11]
    for (int c = 0; c < 6; ++c) {
        const int pos = c == 0 ? 0 : t.position_of(Monomial::variable(c - 1));
        detail::SymSlots slots;
        detail::accumulate(slots, t, pos, Rational(1));
        meta.extraction_mats[c] = detail::to_sdp_matrix(slots, nb);
        meta.extraction_scaling[c] = to_double(t.scaling[pos]);
    }
    for (const auto& c : cs) {
        std::array<double, 5> row{};
        bool nonzero = false;
        for (int i = 0; i < 5; ++i) {
            const int pos = t.position_of(Monomial::variable(i));
            row[i] = to_double(c.coeffs[i] / t.scaling[pos]);
            if (row[i] != 0.0) nonzero = true;
        }
        if (!nonzero) continue;
        meta.fixing_rows.push_back(row);
        meta.fixing_values.push_back(to_double(c.value));
    }
    p.meta = std::move(meta);
    return p;
}

inline SdpProblem assemble_feasibility(const MomentTemplate& t,
                                       const std::vector<PointConstraint>& cs) {
    return assemble(t, cs, false);
}

inline SdpProblem assemble_lambda_max(const MomentTemplate& t,
                                      const std::vector<PointConstraint>& cs) {
    if (cs.empty()) throw std::invalid_argument("assemble_lambda_max: need a direction");
    return assemble(t, cs, true);
}

} // namespace bellcert
