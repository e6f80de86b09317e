#pragma once

// Gaussian tail helpers shared by the transmitter, receiver and analytic
// modules. Double-precision entry points sit next to __float128 overloads used
// by the closed-form link analysis.

#include <quadmath.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <type_traits>

namespace spad_ofdm {

using quad = __float128;

namespace xmath {

inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double erfc(double x) { return std::erfc(x); }
inline double expm1(double x) { return std::expm1(x); }
inline double abs(double x) { return std::fabs(x); }

inline quad exp(quad x) { return expq(x); }
inline quad log(quad x) { return logq(x); }
inline quad sqrt(quad x) { return sqrtq(x); }
inline quad erfc(quad x) { return erfcq(x); }
inline quad expm1(quad x) { return expm1q(x); }
inline quad abs(quad x) { return fabsq(x); }

template <typename Real>
inline Real pi()
{
    if constexpr (std::is_same_v<Real, quad>)
        return acosq(quad(-1));
    else
        return std::numbers::pi_v<Real>;
}

} // namespace xmath

/// Standard normal density.
template <typename Real>
inline Real normal_pdf(Real x)
{
    return xmath::exp(-x * x / 2) / xmath::sqrt(2 * xmath::pi<Real>());
}

/// Gaussian tail probability Q(x) = P(Z > x) = erfc(x/sqrt 2)/2.
template <typename Real>
inline Real q_function(Real x)
{
    return xmath::erfc(x / xmath::sqrt(Real(2))) / 2;
}

/// Mills ratio Q(z)/f(z) for large positive z, by backward evaluation of
/// the continued fraction 1/(z+1/(z+2/(z+3/(z+...)))).
template <typename Real>
inline Real mills_ratio_cf(Real z, int terms = 200)
{
    Real t = z;
    for (int n = terms; n >= 1; --n)
        t = z + Real(n) / t;
    return 1 / t;
}

/// log Q(z), finite for every real z (no underflow in the far tail).
template <typename Real>
inline Real log_q_function(Real z)
{
    // erfc is representable and accurate well below these thresholds; the
    // continued fraction converges in a handful of terms above them.
    const Real switch_point = std::is_same_v<Real, quad> ? Real(100) : Real(30);
    if (z < switch_point)
        return xmath::log(q_function(z));
    return -z * z / 2 - xmath::log(xmath::sqrt(2 * xmath::pi<Real>())) +
           xmath::log(mills_ratio_cf(z));
}

inline double to_double(quad x) { return static_cast<double>(x); }

} // namespace spad_ofdm
