#pragma once

#include "bellcert/rational.hpp"
#include "bellcert/scenario.hpp"
#include "bellcert/simplex.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace bellcert {

/// A linear functional alpha on the correlators plus a classical bound betaC.
/// The inequality alpha.S + betaC >= 0 is valid iff it holds at every
/// polytope vertex.
struct BellInequality {
    Correlators alpha;
    Rational beta_c = 0;
    bool verified = false;

    template <class T>
    T evaluate(const BasicCorrelators<T>& s) const {
        T acc{};
        for (int i = 0; i < 5; ++i) {
            if constexpr (std::is_same_v<T, Rational>)
                acc += alpha[i] * s[i];
            else
                acc += to_double(alpha[i]) * s[i];
        }
        if constexpr (std::is_same_v<T, Rational>)
            return acc + beta_c;
        else
            return acc + to_double(beta_c);
    }
};

/// Linear map on correlator vectors.
struct LinearFunctional {
    Correlators coeffs;

    template <class T>
    T evaluate(const BasicCorrelators<T>& s) const {
        T acc{};
        for (int i = 0; i < 5; ++i) {
            if constexpr (std::is_same_v<T, Rational>)
                acc += coeffs[i] * s[i];
            else
                acc += to_double(coeffs[i]) * s[i];
        }
        return acc;
    }
};

enum class MembershipStatus { Inside, Outside };

struct MembershipVerdict {
    MembershipStatus status = MembershipStatus::Inside;
    /// Inside: convex weights over vertices (by strategy counts), summing to 1,
    /// reproducing the query within the membership tolerance.
    std::vector<std::pair<StrategyCounts, Rational>> weights;
    /// Outside: inequality >= 0 on every vertex and < 0 at the query.
    std::optional<BellInequality> separator;
    /// Chebyshev distance of the query from the polytope (0 when Inside).
    Rational distance = 0;
};

inline constexpr long long kLpColumnCap = 100000;
inline const Rational kMembershipTolerance = Rational(1, 100000000); // 1e-8

namespace detail {

// min-delta LP: delta >= ||F S(w) - p||_inf over convex weights w.
// rows: k "<=" rows, k ">=" rows, 1 convexity row.
struct ProjectedLp {
    LpProblem lp;
    std::vector<StrategyCounts> counts;
    std::size_t k = 0;
};

inline ProjectedLp build_projected_lp(const std::vector<LinearFunctional>& fs,
                                      const std::vector<Rational>& values, long long n) {
    const std::size_t k = fs.size();
    ProjectedLp out;
    out.k = k;
    check_vertex_budget(n);
    if (vertex_count(n) > Int(kLpColumnCap))
        throw BudgetExceeded("membership: vertex column cap exceeded (" +
                             vertex_count(n).str() + " > " + std::to_string(kLpColumnCap) + ")");
    LpProblem& lp = out.lp;
    lp.rows = 2 * k + 1;
    for_each_composition(n, [&](const StrategyCounts& x) {
        const CorrelatorsI s = vertex_correlators(x, n);
        const Correlators sq = to_rationals(s);
        std::vector<Rational> col(lp.rows, 0);
        for (std::size_t r = 0; r < k; ++r) {
            const Rational f = fs[r].evaluate(sq);
            col[r] = f;
            col[k + r] = f;
        }
        col[2 * k] = 1;
        lp.columns.push_back(std::move(col));
        lp.cost.emplace_back(0);
        out.counts.push_back(x);
    });
    // delta column
    {
        std::vector<Rational> col(lp.rows, 0);
        for (std::size_t r = 0; r < k; ++r) {
            col[r] = -1;
            col[k + r] = 1;
        }
        lp.columns.push_back(std::move(col));
        lp.cost.emplace_back(1);
    }
    // slack columns: +1 on "<=" rows, -1 on ">=" rows
    for (std::size_t r = 0; r < k; ++r) {
        std::vector<Rational> col(lp.rows, 0);
        col[r] = 1;
        lp.columns.push_back(std::move(col));
        lp.cost.emplace_back(0);
    }
    for (std::size_t r = 0; r < k; ++r) {
        std::vector<Rational> col(lp.rows, 0);
        col[k + r] = -1;
        lp.columns.push_back(std::move(col));
        lp.cost.emplace_back(0);
    }
    lp.rhs.assign(lp.rows, 0);
    for (std::size_t r = 0; r < k; ++r) lp.rhs[r] = lp.rhs[k + r] = values[r];
    lp.rhs[2 * k] = 1;
    return out;
}

inline MembershipVerdict verdict_from_lp(const ProjectedLp& plp, const LpSolution& sol,
                                         const std::vector<LinearFunctional>& fs,
                                         const std::vector<Rational>& values,
                                         const Rational& tol) {
    if (sol.status != LpStatus::Optimal)
        throw std::logic_error("membership: Chebyshev LP must have an optimum");
    MembershipVerdict v;
    v.distance = sol.objective;
    const std::size_t k = plp.k;
    if (sol.objective <= tol) {
        v.status = MembershipStatus::Inside;
        for (std::size_t j = 0; j < plp.counts.size(); ++j)
            if (sol.x[j] != 0) v.weights.emplace_back(plp.counts[j], sol.x[j]);
        return v;
    }
    v.status = MembershipStatus::Outside;
    // Optimal simplex prices: q.F(S(vertex)) + y0 <= 0 for every vertex and
    // q.p + y0 = delta* > 0, with q_r = y_r^<= + y_r^>=.
    BellInequality sep;
    Rational y0 = sol.dual[2 * k];
    for (int i = 0; i < 5; ++i) {
        Rational a = 0;
        for (std::size_t r = 0; r < k; ++r) a += (sol.dual[r] + sol.dual[k + r]) * fs[r].coeffs[i];
        sep.alpha[i] = -a;
    }
    sep.beta_c = -y0;
    (void)values;
    v.separator = sep;
    return v;
}

} // namespace detail

/// LP membership of a point in the projected polytope: are the given
/// functional values attainable as a convex combination of vertices? Points
/// within `tol` (Chebyshev distance) of the boundary are reported Inside.
inline MembershipVerdict membership_projected(const std::vector<LinearFunctional>& fs,
                                              const std::vector<Rational>& values, long long n,
                                              const Rational& tol = kMembershipTolerance) {
    if (fs.empty() || fs.size() > 5)
        throw std::invalid_argument("membership_projected: need 1..5 functionals");
    if (fs.size() != values.size())
        throw std::invalid_argument("membership_projected: functional/value count mismatch");
    auto plp = detail::build_projected_lp(fs, values, n);
    return detail::verdict_from_lp(plp, solve_lp(plp.lp), fs, values, tol);
}

/// Full-dimensional membership in the symmetrized local polytope.
inline MembershipVerdict membership(const Correlators& point, long long n,
                                    const Rational& tol = kMembershipTolerance) {
    std::vector<LinearFunctional> fs(5);
    std::vector<Rational> values(5);
    for (int i = 0; i < 5; ++i) {
        fs[i].coeffs[i] = 1;
        values[i] = point[i];
    }
    return membership_projected(fs, values, n, tol);
}

inline MembershipVerdict membership(const CorrelatorsD& point, long long n,
                                    const Rational& tol = kMembershipTolerance) {
    return membership(to_rationals(point), n, tol);
}

// ---------------------------------------------------------------------------
// Classical bound: exact streamed minimum of alpha.S over all vertices.
// ---------------------------------------------------------------------------

struct BoundResult {
    Rational minimum;
    StrategyCounts argmin{};
};

namespace detail {

inline Int lcm_int(const Int& a, const Int& b) {
    if (a == 0 || b == 0) return 0;
    return a / gcd(a, b) * b;
}

struct ScaledAlpha {
    std::array<Int, 5> a{};
    Int scale = 1;
    bool fits_int64 = false;
    std::array<long long, 5> a64{};
};

inline ScaledAlpha scale_alpha(const Correlators& alpha, long long n) {
    ScaledAlpha s;
    s.scale = 1;
    for (int i = 0; i < 5; ++i) s.scale = lcm_int(s.scale, denominator(alpha[i]));
    if (s.scale == 0) s.scale = 1;
    Int maxabs = 0;
    for (int i = 0; i < 5; ++i) {
        s.a[i] = numerator(alpha[i]) * (s.scale / denominator(alpha[i]));
        if (abs(s.a[i]) > maxabs) maxabs = abs(s.a[i]);
    }
    const Int nn = Int(n) * Int(n) + Int(n);
    s.fits_int64 = (maxabs * nn * 5) < (Int(1) << 62);
    if (s.fits_int64)
        for (int i = 0; i < 5; ++i) s.a64[i] = s.a[i].convert_to<long long>();
    return s;
}

template <class Acc, class Coef>
BoundResult bound_over_chunk(const std::array<Coef, 5>& a, long long n,
                             const CompositionChunk& chunk) {
    bool first = true;
    Acc best{};
    StrategyCounts arg{};
    for_each_composition(n, chunk, [&](const StrategyCounts& x) {
        const CorrelatorsI s = vertex_correlators(x, n);
        Acc v{};
        for (int i = 0; i < 5; ++i) v += Acc(a[i]) * Acc(s[i]);
        if (first || v < best || (v == best && x < arg)) {
            best = v;
            arg = x;
            first = false;
        }
    });
    BoundResult r;
    r.minimum = Rational(Int(best));
    r.argmin = arg;
    return r;
}

} // namespace detail

/// Exact minimum of alpha.S over all C(N+3,3) vertices, streamed in constant
/// memory; rational alpha is scaled to integers so the scan runs in integer
/// arithmetic. Ties resolve to the lexicographically smallest counts.
inline BoundResult classical_bound_ex(const Correlators& alpha, long long n, int threads = 1) {
    check_vertex_budget(n);
    const detail::ScaledAlpha sa = detail::scale_alpha(alpha, n);
    if (threads < 1) threads = 1;
    const auto chunks = make_composition_chunks(n, threads == 1 ? 1 : threads * 4);

    std::vector<BoundResult> partial(chunks.size());
    auto run = [&](std::size_t ci) {
        if (sa.fits_int64)
            partial[ci] = detail::bound_over_chunk<long long>(sa.a64, n, chunks[ci]);
        else
            partial[ci] = detail::bound_over_chunk<Int>(sa.a, n, chunks[ci]);
    };
    if (threads == 1 || chunks.size() == 1) {
        for (std::size_t c = 0; c < chunks.size(); ++c) run(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t c = next.fetch_add(1); c < chunks.size(); c = next.fetch_add(1))
                    run(c);
            });
        for (auto& th : pool) th.join();
    }

    BoundResult best = partial[0];
    for (std::size_t c = 1; c < chunks.size(); ++c) {
        if (partial[c].minimum < best.minimum ||
            (partial[c].minimum == best.minimum && partial[c].argmin < best.argmin))
            best = partial[c];
    }
    best.minimum /= Rational(sa.scale);
    return best;
}

inline Rational classical_bound(const Correlators& alpha, long long n, int threads = 1) {
    return classical_bound_ex(alpha, n, threads).minimum;
}

inline Rational classical_bound(const BellInequality& expr, long long n, int threads = 1) {
    return classical_bound_ex(expr.alpha, n, threads).minimum;
}

// ---------------------------------------------------------------------------
// 2D projection of the vertex set and its convex hull.
// ---------------------------------------------------------------------------

struct ProjectedPoint {
    Rational u, v;
    StrategyCounts witness{};
};

/// Counter-clockwise convex polygon with no collinear triples; each corner
/// remembers a strategy-count witness.
using ProjectedPolygon = std::vector<ProjectedPoint>;

inline constexpr long long kHullMaterializeCap = 2000000;
inline constexpr long long kHullBucketCap = 2000000;

namespace detail {

inline __int128 cross128(long long ox, long long oy, long long ax, long long ay, long long bx,
                         long long by) {
    return static_cast<__int128>(ax - ox) * (by - oy) - static_cast<__int128>(ay - oy) * (bx - ox);
}

template <class C>
struct HullPoint {
    C x, y;
    StrategyCounts w{};
    friend bool operator<(const HullPoint& a, const HullPoint& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.w < b.w;
    }
    friend bool operator==(const HullPoint& a, const HullPoint& b) {
        return a.x == b.x && a.y == b.y;
    }
};

template <class C>
int orient(const HullPoint<C>& o, const HullPoint<C>& a, const HullPoint<C>& b) {
    if constexpr (std::is_same_v<C, long long>) {
        const __int128 c = cross128(o.x, o.y, a.x, a.y, b.x, b.y);
        return c > 0 ? 1 : (c < 0 ? -1 : 0);
    } else {
        const C c = (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
        return c > 0 ? 1 : (c < 0 ? -1 : 0);
    }
}

// Andrew monotone chain, strict turns only: CCW, no collinear triples.
template <class C>
std::vector<HullPoint<C>> monotone_chain(std::vector<HullPoint<C>>& pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<HullPoint<C>> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && orient(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && orient(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

struct ScaledFunctional {
    std::array<Int, 5> a{};
    Int scale = 1;
    std::array<long long, 5> a64{};
};

inline ScaledFunctional scale_functional(const LinearFunctional& f) {
    ScaledFunctional s;
    for (int i = 0; i < 5; ++i) s.scale = lcm_int(s.scale, denominator(f.coeffs[i]));
    if (s.scale == 0) s.scale = 1;
    for (int i = 0; i < 5; ++i)
        s.a[i] = numerator(f.coeffs[i]) * (s.scale / denominator(f.coeffs[i]));
    return s;
}

inline bool functional_fits_int64(const ScaledFunctional& s, long long n) {
    Int maxabs = 0;
    for (int i = 0; i < 5; ++i)
        if (abs(s.a[i]) > maxabs) maxabs = abs(s.a[i]);
    return (maxabs * (Int(n) * Int(n) + Int(n)) * 5) < (Int(1) << 62);
}

template <class C, class Coef>
C project_one(const std::array<Coef, 5>& a, const CorrelatorsI& s) {
    C acc{};
    for (int i = 0; i < 5; ++i) acc += C(a[i]) * C(s[i]);
    return acc;
}

template <class C>
std::vector<HullPoint<C>> collect_hull_points(long long n, const std::array<C, 5>& a1,
                                              const std::array<C, 5>& a2) {
    std::vector<HullPoint<C>> pts;
    if (vertex_count(n) <= Int(kHullMaterializeCap)) {
        pts.reserve(static_cast<std::size_t>(vertex_count(n).convert_to<long long>()));
        for_each_composition(n, [&](const StrategyCounts& x) {
            const CorrelatorsI s = vertex_correlators(x, n);
            pts.push_back({project_one<C>(a1, s), project_one<C>(a2, s), x});
        });
        return pts;
    }
    // Streamed: per distinct u keep only the v-extremes; the hull of the
    // extremes equals the hull of all points.
    struct MinMax {
        C vmin, vmax;
        StrategyCounts wmin, wmax;
    };
    std::map<C, MinMax> buckets;
    for_each_composition(n, [&](const StrategyCounts& x) {
        const CorrelatorsI s = vertex_correlators(x, n);
        const C u = project_one<C>(a1, s);
        const C v = project_one<C>(a2, s);
        auto it = buckets.find(u);
        if (it == buckets.end()) {
            if (static_cast<long long>(buckets.size()) >= kHullBucketCap)
                throw BudgetExceeded("project_2d: distinct projected abscissae exceed bucket cap");
            buckets.emplace(u, MinMax{v, v, x, x});
        } else {
            if (v < it->second.vmin || (v == it->second.vmin && x < it->second.wmin)) {
                it->second.vmin = v;
                it->second.wmin = x;
            }
            if (v > it->second.vmax || (v == it->second.vmax && x < it->second.wmax)) {
                it->second.vmax = v;
                it->second.wmax = x;
            }
        }
    });
    pts.reserve(2 * buckets.size());
    for (const auto& [u, mm] : buckets) {
        pts.push_back({u, mm.vmin, mm.wmin});
        if (mm.vmax != mm.vmin) pts.push_back({u, mm.vmax, mm.wmax});
    }
    return pts;
}

} // namespace detail

/// Exact convex hull of the vertex set projected to the plane (f1.S, f2.S):
/// counter-clockwise, no collinear triples. Streams vertices when they are
/// too many to materialize.
inline ProjectedPolygon project_2d(long long n, const LinearFunctional& f1,
                                   const LinearFunctional& f2) {
    // linear independence of the two functionals
    {
        int piv = -1;
        for (int i = 0; i < 5; ++i)
            if (f1.coeffs[i] != 0) {
                piv = i;
                break;
            }
        if (piv < 0) throw std::invalid_argument("project_2d: first functional is zero");
        bool independent = false;
        for (int i = 0; i < 5; ++i) {
            if (f2.coeffs[i] * f1.coeffs[piv] != f1.coeffs[i] * f2.coeffs[piv]) {
                independent = true;
                break;
            }
        }
        if (!independent)
            throw std::invalid_argument("project_2d: functionals are linearly dependent");
    }
    check_vertex_budget(n);
    const auto s1 = detail::scale_functional(f1);
    const auto s2 = detail::scale_functional(f2);

    ProjectedPolygon poly;
    const Rational q1(1, s1.scale), q2(1, s2.scale);
    if (detail::functional_fits_int64(s1, n) && detail::functional_fits_int64(s2, n)) {
        std::array<long long, 5> a1{}, a2{};
        for (int i = 0; i < 5; ++i) {
            a1[i] = s1.a[i].convert_to<long long>();
            a2[i] = s2.a[i].convert_to<long long>();
        }
        auto pts = detail::collect_hull_points<long long>(n, a1, a2);
        auto hull = detail::monotone_chain(pts);
        for (const auto& h : hull) poly.push_back({Rational(h.x) * q1, Rational(h.y) * q2, h.w});
    } else {
        auto pts = detail::collect_hull_points<Int>(n, s1.a, s2.a);
        auto hull = detail::monotone_chain(pts);
        for (const auto& h : hull) poly.push_back({Rational(h.x) * q1, Rational(h.y) * q2, h.w});
    }
    return poly;
}

/// Exact point-in-polygon test (boundary counts as inside). Assumes CCW.
inline bool polygon_contains(const ProjectedPolygon& poly, const Rational& u, const Rational& v) {
    const std::size_t n = poly.size();
    if (n == 0) return false;
    if (n == 1) return poly[0].u == u && poly[0].v == v;
    if (n == 2) {
        const Rational cross = (poly[1].u - poly[0].u) * (v - poly[0].v) -
                               (poly[1].v - poly[0].v) * (u - poly[0].u);
        if (cross != 0) return false;
        const Rational dot = (u - poly[0].u) * (poly[1].u - poly[0].u) +
                             (v - poly[0].v) * (poly[1].v - poly[0].v);
        const Rational len = (poly[1].u - poly[0].u) * (poly[1].u - poly[0].u) +
                             (poly[1].v - poly[0].v) * (poly[1].v - poly[0].v);
        return dot >= 0 && dot <= len;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        const Rational cross = (b.u - a.u) * (v - a.v) - (b.v - a.v) * (u - a.u);
        if (cross < 0) return false;
    }
    return true;
}

/// Support value max over the polygon of (du, dv).(u, v).
inline double polygon_support(const ProjectedPolygon& poly, double du, double dv) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : poly) best = std::max(best, du * to_double(p.u) + dv * to_double(p.v));
    return best;
}

/// Radial (gauge) function of the polygon along angle theta; requires the
/// origin strictly inside.
inline double polygon_radial(const ProjectedPolygon& poly, double theta) {
    if (poly.size() < 3) throw std::invalid_argument("polygon_radial: degenerate polygon");
    const double dx = std::cos(theta), dy = std::sin(theta);
    double r = std::numeric_limits<double>::infinity();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double ax = to_double(poly[i].u), ay = to_double(poly[i].v);
        const double bx = to_double(poly[(i + 1) % n].u), by = to_double(poly[(i + 1) % n].v);
        // outward normal of a CCW edge
        const double nx = by - ay, ny = -(bx - ax);
        const double h = nx * ax + ny * ay;
        if (h <= 0) throw std::invalid_argument("polygon_radial: origin not inside polygon");
        const double dn = nx * dx + ny * dy;
        if (dn > 0) r = std::min(r, h / dn);
    }
    return r;
}

/// A point of the relaxed surface: the correlator image of real non-negative
/// counts summing to N. Interpolates the vertices.
inline CorrelatorsD relaxed_surface_point(const RealCounts& x, long long n) {
    return vertex_correlators<double>(x, static_cast<double>(n));
}

namespace detail {

/// Convex weights over three polygon corners reproducing (u, v); exact.
inline std::vector<std::pair<StrategyCounts, Rational>> barycentric_weights(
    const ProjectedPolygon& poly, const Rational& u, const Rational& v) {
    const std::size_t n = poly.size();
    if (n == 1) return {{poly[0].witness, Rational(1)}};
    if (n == 2) {
        const Rational du = poly[1].u - poly[0].u, dv = poly[1].v - poly[0].v;
        Rational t = du != 0 ? (u - poly[0].u) / du : (v - poly[0].v) / dv;
        return {{poly[0].witness, 1 - t}, {poly[1].witness, t}};
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const auto& p0 = poly[0];
        const auto& p1 = poly[i];
        const auto& p2 = poly[i + 1];
        const Rational d = (p1.u - p0.u) * (p2.v - p0.v) - (p1.v - p0.v) * (p2.u - p0.u);
        if (d == 0) continue;
        const Rational w1 = ((u - p0.u) * (p2.v - p0.v) - (v - p0.v) * (p2.u - p0.u)) / d;
        const Rational w2 = ((p1.u - p0.u) * (v - p0.v) - (p1.v - p0.v) * (u - p0.u)) / d;
        const Rational w0 = 1 - w1 - w2;
        if (w0 >= 0 && w1 >= 0 && w2 >= 0) {
            std::vector<std::pair<StrategyCounts, Rational>> ws;
            if (w0 != 0) ws.emplace_back(p0.witness, w0);
            if (w1 != 0) ws.emplace_back(p1.witness, w1);
            if (w2 != 0) ws.emplace_back(p2.witness, w2);
            return ws;
        }
    }
    throw std::logic_error("barycentric_weights: point not covered by fan triangulation");
}

} // namespace detail

/// Membership of a 2D-projected point via the streamed exact hull. Same
/// verdict contract as membership_projected; usable far beyond the LP column
/// cap because only the hull is kept in memory.
inline MembershipVerdict membership_projected_hull(const LinearFunctional& f1,
                                                   const LinearFunctional& f2, const Rational& v1,
                                                   const Rational& v2, long long n) {
    const ProjectedPolygon poly = project_2d(n, f1, f2);
    MembershipVerdict out;
    if (polygon_contains(poly, v1, v2)) {
        out.status = MembershipStatus::Inside;
        out.weights = detail::barycentric_weights(poly, v1, v2);
        return out;
    }
    out.status = MembershipStatus::Outside;
    // most violated edge, lifted back to correlator space
    const std::size_t m = poly.size();
    double worst = 1.0;
    std::size_t worst_i = 0;
    Rational worst_cross = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % m];
        const Rational cross = (b.u - a.u) * (v2 - a.v) - (b.v - a.v) * (v1 - a.u);
        if (cross >= 0) continue;
        const double nu = to_double(b.v - a.v), nv = to_double(b.u - a.u);
        const double viol = -to_double(cross) / std::max(1e-300, std::hypot(nu, nv));
        if (viol > 0 && (worst_cross == 0 || viol > worst)) {
            worst = viol;
            worst_i = i;
            worst_cross = cross;
        }
    }
    const auto& a = poly[worst_i];
    const auto& b = poly[(worst_i + 1) % m];
    // inward normal of CCW edge (a, b): (-(bv - av), bu - au)
    const Rational nu = -(b.v - a.v), nv = b.u - a.u;
    BellInequality sep;
    for (int i = 0; i < 5; ++i) sep.alpha[i] = nu * f1.coeffs[i] + nv * f2.coeffs[i];
    sep.beta_c = -(nu * a.u + nv * a.v);
    out.separator = sep;
    return out;
}

} // namespace bellcert
