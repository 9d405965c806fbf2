#pragma once

#include "bellcert/rational.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bellcert {

/// Thrown when an enumeration would exceed the configured vertex budget.
class BudgetExceeded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Dichotomic Bell scenario with d settings per party and correlators up to
/// order K. Only d = K = 2 is supported; each party then has m = 4 local
/// deterministic strategies and the correlator space is 5-dimensional
/// (S0, S1, S00, S01, S11).
struct Scenario {
    long long party_count = 2;
    int settings = 2;
    int max_order = 2;

    int strategies_per_party() const { return 1 << settings; }
    int correlator_dim() const { return 5; }

    void validate() const {
        if (settings != 2) throw std::invalid_argument("scenario: only d = 2 settings supported");
        if (max_order != 2) throw std::invalid_argument("scenario: only K = 2 correlators supported");
        if (party_count < 2) throw std::invalid_argument("scenario: need at least 2 parties");
    }
};

/// The five permutationally invariant correlators of a d = K = 2 scenario.
template <class T>
struct BasicCorrelators {
    T s0{}, s1{}, s00{}, s01{}, s11{};

    T& operator[](int i) {
        switch (i) {
            case 0: return s0;
            case 1: return s1;
            case 2: return s00;
            case 3: return s01;
            default: return s11;
        }
    }
    const T& operator[](int i) const { return const_cast<BasicCorrelators*>(this)->operator[](i); }

    friend bool operator==(const BasicCorrelators&, const BasicCorrelators&) = default;
};

using Correlators = BasicCorrelators<Rational>;
using CorrelatorsD = BasicCorrelators<double>;
using CorrelatorsI = BasicCorrelators<long long>;

inline const char* correlator_name(int i) {
    static const char* names[5] = {"S0", "S1", "S00", "S01", "S11"};
    return names[i];
}

/// -1 if the name is not one of S0, S1, S00, S01, S11.
inline int correlator_index(const std::string& name) {
    for (int i = 0; i < 5; ++i)
        if (name == correlator_name(i)) return i;
    return -1;
}

template <class T>
CorrelatorsD to_doubles(const BasicCorrelators<T>& c) {
    CorrelatorsD r;
    for (int i = 0; i < 5; ++i) r[i] = static_cast<double>(c[i]);
    return r;
}

inline CorrelatorsD to_doubles(const Correlators& c) {
    CorrelatorsD r;
    for (int i = 0; i < 5; ++i) r[i] = to_double(c[i]);
    return r;
}

inline Correlators to_rationals(const CorrelatorsD& c) {
    Correlators r;
    for (int i = 0; i < 5; ++i) r[i] = rational_of(c[i]);
    return r;
}

inline Correlators to_rationals(const CorrelatorsI& c) {
    Correlators r;
    for (int i = 0; i < 5; ++i) r[i] = Rational(c[i]);
    return r;
}

/// How many of the N parties follow each of the 4 strategies. Integer for
/// polytope vertices, real for points of the relaxed surface.
using StrategyCounts = std::array<long long, 4>;
using RealCounts = std::array<double, 4>;

/// The four local deterministic strategies as (outcome of measurement 0,
/// outcome of measurement 1) sign pairs. The ordering is normative: it fixes
/// the Hadamard rows used everywhere downstream (strategy 1 = (+,+),
/// 2 = (-,+), 3 = (+,-), 4 = (-,-)).
inline std::array<std::array<int, 2>, 4> enumerate_lds(int settings = 2) {
    if (settings != 2) throw std::invalid_argument("enumerate_lds: only d = 2 supported");
    return {{{{+1, +1}}, {{-1, +1}}, {{+1, -1}}, {{-1, -1}}}};
}

namespace detail {

template <class T>
bool counts_valid(const std::array<T, 4>& x, T n) {
    T sum{};
    for (const T& v : x) {
        if (v < T{}) return false;
        sum += v;
    }
    return sum == n;
}

inline bool counts_valid(const std::array<double, 4>& x, double n) {
    double sum = 0.0;
    const double slack = 1e-9 * (std::abs(n) + 1.0);
    for (double v : x) {
        if (v < -slack) return false;
        sum += v;
    }
    return std::abs(sum - n) <= 4 * slack;
}

} // namespace detail

/// Maps strategy counts to the correlator vector: (N, S1, S0, Z) is the
/// Hadamard transform of x, then S00 = S0^2 - N, S01 = S0 S1 - Z,
/// S11 = S1^2 - N. Works for integer, rational and real counts alike; at
/// integer counts the image is a polytope vertex, at real counts a point of
/// the relaxed surface.
template <class T>
BasicCorrelators<T> vertex_correlators(const std::array<T, 4>& x, T n) {
    if (!detail::counts_valid(x, n))
        throw std::invalid_argument("vertex_correlators: counts must be >= 0 and sum to N");
    const T s1 = x[0] + x[1] - x[2] - x[3];
    const T s0 = x[0] - x[1] + x[2] - x[3];
    const T z = x[0] - x[1] - x[2] + x[3];
    BasicCorrelators<T> c;
    c.s0 = s0;
    c.s1 = s1;
    c.s00 = s0 * s0 - n;
    c.s01 = s0 * s1 - z;
    c.s11 = s1 * s1 - n;
    return c;
}

inline CorrelatorsI vertex_correlators(const StrategyCounts& x, long long n) {
    return vertex_correlators<long long>(x, n);
}

/// Number of polytope vertices = compositions of N into 4 parts = C(N+3, 3).
inline Int vertex_count(long long n) { return binomial(n + 3, 3); }

inline constexpr long long kVertexBudget = 100000000; // 1e8

inline void check_vertex_budget(long long n, long long budget = kVertexBudget) {
    if (vertex_count(n) > Int(budget))
        throw BudgetExceeded("vertex enumeration budget exceeded: N = " + std::to_string(n) +
                             " has " + vertex_count(n).str() + " vertices (budget " +
                             std::to_string(budget) + ")");
}

/// A slice of the composition space: all compositions whose first coordinate
/// lies in [x1_begin, x1_end). Chunks partition the space so callers can fan
/// enumeration out across workers.
struct CompositionChunk {
    long long x1_begin = 0;
    long long x1_end = 0;
};

/// Streams compositions with x[0] in the chunk range, in lexicographic order
/// (x1, then x2, then x3 ascending). Constant memory.
template <class Fn>
void for_each_composition(long long n, const CompositionChunk& chunk, Fn&& fn) {
    StrategyCounts x{};
    for (long long x1 = chunk.x1_begin; x1 < chunk.x1_end; ++x1) {
        for (long long x2 = 0; x2 <= n - x1; ++x2) {
            for (long long x3 = 0; x3 <= n - x1 - x2; ++x3) {
                x = {x1, x2, x3, n - x1 - x2 - x3};
                fn(static_cast<const StrategyCounts&>(x));
            }
        }
    }
}

template <class Fn>
void for_each_composition(long long n, Fn&& fn) {
    for_each_composition(n, CompositionChunk{0, n + 1}, std::forward<Fn>(fn));
}

/// Splits [0, N] into up to `parts` chunks with roughly equal composition
/// counts. The number of compositions with given x1 is C(N - x1 + 2, 2).
inline std::vector<CompositionChunk> make_composition_chunks(long long n, int parts) {
    std::vector<CompositionChunk> chunks;
    if (parts < 1) parts = 1;
    const Int total = vertex_count(n);
    const Int target = (total + parts - 1) / parts;
    Int acc = 0;
    long long begin = 0;
    for (long long x1 = 0; x1 <= n; ++x1) {
        acc += binomial(n - x1 + 2, 2);
        if (acc >= target || x1 == n) {
            chunks.push_back({begin, x1 + 1});
            begin = x1 + 1;
            acc = 0;
        }
    }
    if (begin <= n) chunks.push_back({begin, n + 1});
    return chunks;
}

/// Materializes every vertex with its strategy counts. Guarded by the
/// enumeration budget; prefer for_each_composition for large N.
inline std::vector<std::pair<StrategyCounts, CorrelatorsI>> enumerate_vertices(
    long long n, long long budget = kVertexBudget) {
    check_vertex_budget(n, budget);
    std::vector<std::pair<StrategyCounts, CorrelatorsI>> out;
    out.reserve(static_cast<std::size_t>(vertex_count(n).convert_to<long long>()));
    for_each_composition(n, [&](const StrategyCounts& x) {
        out.emplace_back(x, vertex_correlators(x, n));
    });
    return out;
}

} // namespace bellcert
