#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>

namespace bellcert {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// Exact: every finite double is a dyadic rational.
inline Rational rational_of(double x) { return Rational(x); }

inline Rational rational_pow(const Rational& base, long long e) {
    if (e == 0) return Rational(1);
    Rational b = e > 0 ? base : Rational(1) / base;
    long long n = e > 0 ? e : -e;
    Rational r(1);
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

inline Int int_pow(Int base, long long e) {
    Int r(1);
    while (e > 0) {
        if (e & 1) r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

inline Int binomial(long long n, long long k) {
    if (k < 0 || k > n) return Int(0);
    if (k > n - k) k = n - k;
    Int num(1), den(1);
    for (long long i = 0; i < k; ++i) {
        num *= Int(n - i);
        den *= Int(i + 1);
    }
    return num / den;
}

} // namespace bellcert
