#pragma once

// Log-domain semiring primitives shared by every detector in the library.
//
// All probability-like quantities are kept as natural logarithms; sums of
// probabilities become max* (Jacobian logarithm) combinations:
//
//     max*(a, b) = ln(e^a + e^b) = max(a,b) + ln(1 + e^-|a-b|)
//
// -inf is a first-class value (log of an exact zero) and must propagate
// exactly through every operation. All arithmetic is double precision.

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace fgdet {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Jacobian logarithm: ln(e^a + e^b), exact up to double rounding.
inline double max_star(double a, double b) {
    if (std::isinf(a) && a < 0.0) return b;
    if (std::isinf(b) && b < 0.0) return a;
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

/// ln(sum_i e^{v[i]}) over a non-empty span. Entries of -inf contribute
/// nothing; the all -inf case yields -inf.
inline double max_star_reduce(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("max_star_reduce: empty input");
    double m = kNegInf;
    for (double x : v)
        if (x > m) m = x;
    if (std::isinf(m) && m < 0.0) return m;  // all entries are -inf
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

/// Subtracts max_star_reduce(v) in place so that ln(sum e^{v[i]}) == 0,
/// i.e. v becomes a normalized log-probability vector.
inline void log_normalize(std::span<double> v) {
    const double z = max_star_reduce(v);
    if (std::isinf(z) && z < 0.0)
        throw std::domain_error("log_normalize: all entries are -inf");
    for (double& x : v) x -= z;
}

}  // namespace fgdet
