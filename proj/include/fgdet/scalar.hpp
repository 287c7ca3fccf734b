#pragma once

// Scalar abstraction used by the templated detector cores.
//
// The same algorithm source runs with S = double (plain, fast evaluation)
// and S = ad::Var (tape-recorded for reverse-mode gradients). Each primitive
// below has a direct double overload and a tape-building Var overload.
// Complex values over S are carried as a simple re/im pair so that the
// preprocessor taps (trainable, hence Var-valued) can flow through the
// observation-model construction.

#include <complex>

#include "fgdet/autodiff.hpp"
#include "fgdet/logdomain.hpp"

namespace fgdet {

// ---- lifting constants -------------------------------------------------

template <class S>
S sconst(double c);

template <>
inline double sconst<double>(double c) {
    return c;
}

template <>
inline ad::Var sconst<ad::Var>(double c) {
    return {ad::active_tape()->leaf(c)};
}

inline double value_of(double x) { return x; }
inline double value_of(ad::Var x) { return ad::active_tape()->val(x.i); }

// ---- elementwise primitives --------------------------------------------

inline double add_c(double a, double c) { return a + c; }
inline ad::Var add_c(ad::Var a, double c) { return {ad::active_tape()->add_c(a.i, c)}; }

inline double mul_c(double a, double c) { return a * c; }
inline ad::Var mul_c(ad::Var a, double c) { return {ad::active_tape()->mul_c(a.i, c)}; }

inline ad::Var max_star(ad::Var a, ad::Var b) { return {ad::active_tape()->max_star(a.i, b.i)}; }
// double overload lives in logdomain.hpp

inline double sub_clamp_floor(double a, double b, double floor) {
    const double v = a - b;
    return v > floor ? v : floor;
}
inline ad::Var sub_clamp_floor(ad::Var a, ad::Var b, double floor) {
    return {ad::active_tape()->sub_clamp_floor(a.i, b.i, floor)};
}

inline double clip(double a, double lo, double hi) { return a < lo ? lo : (a > hi ? hi : a); }
inline ad::Var clip(ad::Var a, double lo, double hi) { return {ad::active_tape()->clip(a.i, lo, hi)}; }

inline double softplus_log2(double x) {
    const double nat = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    return nat * 1.4426950408889634;
}
inline ad::Var softplus_log2(ad::Var a) { return {ad::active_tape()->softplus_log2(a.i)}; }

// ---- fused reductions ---------------------------------------------------

inline double sum_list(const double* xs, int n) {
    double v = 0.0;
    for (int t = 0; t < n; ++t) v += xs[t];
    return v;
}
static_assert(sizeof(ad::Var) == sizeof(std::int32_t),
              "Var arrays are reinterpreted as index arrays below");

inline ad::Var sum_list(const ad::Var* xs, int n) {
    return {ad::active_tape()->sum_n(&xs[0].i, n)};
}

inline double lse_reduce(const double* xs, int n) {
    return max_star_reduce({xs, (std::size_t)n});
}
inline ad::Var lse_reduce(const ad::Var* xs, int n) {
    return {ad::active_tape()->max_star_n(&xs[0].i, n)};
}

/// ln sum_t exp(xs[t] + ys[t]) — the factor-to-variable marginalization.
inline double max_star_pairs(const double* xs, const double* ys, int n) {
    double m = kNegInf;
    for (int t = 0; t < n; ++t) {
        const double s = xs[t] + ys[t];
        if (s > m) m = s;
    }
    if (std::isinf(m) && m < 0) return m;
    double acc = 0.0;
    for (int t = 0; t < n; ++t) acc += std::exp(xs[t] + ys[t] - m);
    return m + std::log(acc);
}
inline ad::Var max_star_pairs(const ad::Var* xs, const ad::Var* ys, int n) {
    return {ad::active_tape()->max_star_pairs(&xs[0].i, &ys[0].i, n)};
}

inline double lin_comb(const double* coefs, const double* xs, int n) {
    double v = 0.0;
    for (int t = 0; t < n; ++t) v += coefs[t] * xs[t];
    return v;
}
inline ad::Var lin_comb(const double* coefs, const ad::Var* xs, int n) {
    return {ad::active_tape()->lin_comb(coefs, &xs[0].i, n)};
}

// ---- complex over S ------------------------------------------------------

template <class S>
struct Cx {
    S re, im;
};

template <class S>
Cx<S> cx_const(std::complex<double> z) {
    return {sconst<S>(z.real()), sconst<S>(z.imag())};
}

template <class S>
Cx<S> cadd(Cx<S> a, Cx<S> b) {
    return {a.re + b.re, a.im + b.im};
}

template <class S>
Cx<S> csub(Cx<S> a, Cx<S> b) {
    return {a.re - b.re, a.im - b.im};
}

/// a + c * x
inline double add_scaled(double a, double x, double c) { return a + x * c; }
inline ad::Var add_scaled(ad::Var a, ad::Var x, double c) {
    ad::Tape* t = ad::active_tape();
    return {t->add(a.i, t->mul_c(x.i, c))};
}

/// a * z with constant complex z.
template <class S>
Cx<S> cmul_const(Cx<S> a, std::complex<double> z) {
    // (a.re + i a.im)(zr + i zi)
    const double zr = z.real(), zi = z.imag();
    return {add_scaled(mul_c(a.re, zr), a.im, -zi), add_scaled(mul_c(a.re, zi), a.im, zr)};
}

template <class S>
std::complex<double> cvalue(Cx<S> a) {
    return {value_of(a.re), value_of(a.im)};
}

}  // namespace fgdet
