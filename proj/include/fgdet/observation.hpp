#pragma once

// Matched-filter and generalized observation models.
//
// The detectors do not work on y directly but on the preprocessed pair
//
//     x~ = P y,      G~ = P H,
//
// where P is a banded Toeplitz matrix built from a preprocessor tap vector.
// Modes:
//   Matched    — P = H^H (tap vector = time-reversed conjugate channel).
//                Then x~ = H^H y, G~ = H^H H (Hermitian, band L): the
//                classic matched-filter statistics.
//   Generic    — free taps p of length Lp+1; G~ is generally non-Hermitian.
//   Structured — P = P~ H^H with free taps p~ of length Lp+1 (the matched
//                filter is always applied first); p~ = (1,0,...,0)
//                reproduces Matched exactly.
//
// Off-diagonal support of G~ = PH spans row-col offsets [-L, T] where T is
// the effective preprocessor length. The stored band is symmetric:
//   BandPolicy::Channel — band = L (entries beyond it zeroed), the default;
//   BandPolicy::Full    — band = L + Lp (covers all structural support).
//
// Known boundary symbols are absorbed after truncation: for every in-range k,
//   x~_k <- x~_k - sum_{out-of-range l, |k-l| <= band} G~_{k,l} * c_l,
// and only the K in-range rows/columns are kept.
//
// Index conventions (0-based): extended position e in [0, K+2L) carries
// symbol k = e - L; received sample r in [0, K+L).

#include <complex>
#include <vector>

#include "fgdet/channel.hpp"
#include "fgdet/scalar.hpp"

namespace fgdet {

enum class PreprocMode { Matched, Generic, Structured };
enum class BandPolicy { Channel, Full };

template <class S>
struct PreT {
    PreprocMode mode = PreprocMode::Matched;
    std::vector<Cx<S>> taps;  // Generic/Structured only, length Lp+1
};

template <class S>
struct ObsT {
    int K = 0;
    int L = 0;
    int band = 0;
    double sigma_sq = 0.0;
    std::vector<Cx<S>> g;  // K x (2*band+1): g[k][band+d] = G~_{k,k+d}
    std::vector<Cx<S>> x;  // K boundary-adjusted x~ entries

    const Cx<S>& gband(int k, int d) const { return g[(std::size_t)k * (2 * band + 1) + band + d]; }
    Cx<S>& gband(int k, int d) { return g[(std::size_t)k * (2 * band + 1) + band + d]; }
};

using Preprocessor = PreT<double>;
using ObservationModel = ObsT<double>;

///// Effective row tap vector q of P (P[i][r] = q[i-r]): the matched taps,
/// the free taps, or their convolution, depending on mode.
template <class S>
std::vector<Cx<S>> effective_preproc_taps(const ChannelTaps& taps, const PreT<S>& pre) {
    const int L = taps.L();
    std::vector<Cx<S>> q;
    switch (pre.mode) {
        case PreprocMode::Matched:
            q.resize(L + 1);
            for (int u = 0; u <= L; ++u) q[u] = cx_const<S>(std::conj(taps.h[L - u]));
            break;
        case PreprocMode::Generic:
            if (pre.taps.empty()) throw std::invalid_argument("preprocessor: empty tap vector");
            q = pre.taps;
            break;
        case PreprocMode::Structured: {
            if (pre.taps.empty()) throw std::invalid_argument("preprocessor: empty tap vector");
            const int lp = (int)pre.taps.size() - 1;
            q.resize(lp + L + 1);
            for (int u = 0; u < (int)q.size(); ++u) {
                Cx<S> acc{sconst<S>(0.0), sconst<S>(0.0)};
                for (int v = 0; v <= lp; ++v) {
                    const int t = u - v;
                    if (t < 0 || t > L) continue;
                    acc = cadd(acc, cmul_const(pre.taps[v], std::conj(taps.h[L - t])));
                }
                q[u] = acc;
            }
            break;
        }
    }
    return q;
}

inline int observation_band(const ChannelTaps& taps, PreprocMode mode, int preproc_len,
                            BandPolicy policy) {
    const int L = taps.L();
    if (mode == PreprocMode::Matched) return L;
    const int lp = preproc_len - 1;  // preproc_len counts taps (Lp+1)
    return policy == BandPolicy::Channel ? L : L + lp;
}

template <class S>
ObsT<S> build_observation_t(const ChannelTaps& taps, double sigma_sq, const std::vector<cplx>& y,
                            int K, const PreT<S>& pre, BandPolicy policy, cplx boundary_point) {
    const int L = taps.L();
    if (K < 1) throw std::invalid_argument("build_observation: K must be positive");
    if ((int)y.size() != K + L) throw std::invalid_argument("build_observation: y must have K+L samples");
    if (sigma_sq <= 0.0) throw std::invalid_argument("build_observation: noise variance must be positive");

    const std::vector<Cx<S>> q = effective_preproc_taps(taps, pre);
    const int T = (int)q.size() - 1;
    const int band = observation_band(taps, pre.mode, (int)pre.taps.size(), policy);

    ObsT<S> obs;
    obs.K = K;
    obs.L = L;
    obs.band = band;
    obs.sigma_sq = sigma_sq;
    const Cx<S> zero{sconst<S>(0.0), sconst<S>(0.0)};
    obs.g.assign((std::size_t)K * (2 * band + 1), zero);
    obs.x.assign(K, zero);

    // G~ entry (e, e') as an explicit windowed sum; empty windows give 0.
    // In column-offset terms (d = e' - e) the structural support of PH is
    // d in [-T, +L]; the Channel policy additionally zeroes |d| > L. Both
    // are handled by never writing those slots.
    auto entry = [&](int e, int ep) -> Cx<S> {
        int r_lo = std::max({0, e - T, ep - L});
        int r_hi = std::min({K + L - 1, e, ep});
        Cx<S> acc = zero;
        for (int r = r_lo; r <= r_hi; ++r)
            acc = cadd(acc, cmul_const(q[e - r], taps.h[r - ep + L]));
        return acc;
    };

    // Interior (unclipped-window) entries depend only on d; build them once.
    std::vector<Cx<S>> phi(2 * band + 1, zero);
    for (int d = -band; d <= band; ++d) {
        if (d < -T || d > L) continue;
        Cx<S> acc = zero;
        for (int u = std::max(0, -d); u <= std::min(T, L - d); ++u)
            acc = cadd(acc, cmul_const(q[u], taps.h[L - u - d]));
        phi[band + d] = acc;
    }

    for (int k = 0; k < K; ++k) {
        const int e = k + L;
        for (int d = -band; d <= band; ++d) {
            if (d < -T || d > L) continue;
            const int ep = e + d;
            const bool interior = std::max(e - T, ep - L) >= 0 && std::min(e, ep) <= K + L - 1;
            obs.gband(k, d) = interior ? phi[band + d] : entry(e, ep);
        }
    }

    // x~ = P y restricted to in-range rows.
    for (int k = 0; k < K; ++k) {
        const int e = k + L;
        Cx<S> acc = zero;
        for (int u = 0; u <= T; ++u) {
            const int r = e - u;
            if (r < 0 || r > K + L - 1) continue;
            acc = cadd(acc, cmul_const(q[u], y[r]));
        }
        obs.x[k] = acc;
    }

    // Absorb known boundary symbols into the linear term.
    for (int k = 0; k < K; ++k) {
        const int e = k + L;
        for (int d = -band; d <= band; ++d) {
            const int ep = e + d;
            const int neigh = ep - L;  // info-symbol index of column ep
            if (neigh >= 0 && neigh < K) continue;  // in range, stays in the graph
            if (d < -T || d > L) continue;          // structurally zero
            obs.x[k] = csub(obs.x[k], cmul_const(obs.gband(k, d), boundary_point));
        }
    }

    return obs;
}

/// Plain-scalar build (the evaluation path).
ObservationModel build_observation(const ChannelTaps& taps, double sigma_sq,
                                   const std::vector<cplx>& y, int K, const Preprocessor& pre,
                                   BandPolicy policy, cplx boundary_point);

}  // namespace fgdet
