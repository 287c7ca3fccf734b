#pragma once

// Sum-product symbol detection on the (generalized) factor graph of the
// observation model, with per-message neural-BP weights.
//
// Graph: one variable node per in-range symbol c_k; a symbol factor
//
//     F~_k(c_k) = (kappa1/sigma^2) Re{ kappa2 * 2 x~_k c_k^*
//                                      - kappa3 * G~_{k,k} |c_k|^2 }
//
// attached to each, and one pair factor per banded index pair (k, l), l < k:
//
//     I~_{k,l}(c_k, c_l) = lambda_{k,l} * (J~_{k,l} + J~_{l,k}),
//     J~_{k,l}(c_k, c_l) = -(1/sigma^2) Re{ G~_{k,l} c_l c_k^* }.
//
// Flooding schedule, iterations n = 1..N, neighbor offsets
// j in {-band..-1, +1..band} (k+j kept in range):
//
//     xi_k^(n)(c)   = w_p^(n) ln P_e(c_k=c) + F~_k^(n)(c)
//     mu_{k,j}^(n)  = w_v,k,j^(n) * ( xi_k^(n) + sum_{j' != j} nu_{k,j'}^(n-1) )
//     nu_{k,j}^(n)  = w_f,k,j^(n) * max*_{c'} ( I~_{k,k+j}^(n)(c, c') + mu_{k+j,-j}^(n)(c') )
//
// initialized at nu^(0) = -ln M, read out as
//
//     ln P(c_k | y) = normalize( xi_k^(N+1) + sum_j nu_{k,j}^(N) )
//
// where xi^(N+1) reuses the iteration-N kappa / w_p values.
//
// Numeric policy: every message is stored log-normalized (its log-sum-exp
// subtracted) and floored at -300. Uniform per-message shifts propagate as
// uniform shifts through all later updates for any weight values and cancel
// in the normalized readout, so this is exactly output-equivalent to the raw
// recursion while keeping values bounded; the floor (probability ratio
// e^-300) only guards against runaway under extreme trained weights.
//
// All-ones weights on the matched observation model give the plain
// sum-product detector; on a cycle-free graph (L = 1 bands) that detector is
// exact a posteriori inference.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fgdet/modem.hpp"
#include "fgdet/observation.hpp"

namespace fgdet {

inline constexpr double kMessageFloor = -300.0;

/// Per-message weights of one detection unit. When `tied` is set the k
/// dimension collapses to 1 and every symbol shares the iteration's weights.
template <class S>
struct NbpT {
    int N = 0;     // iterations parameterized
    int K = 1;     // symbols (1 if tied)
    int band = 0;  // neighbor half-width
    bool tied = true;
    std::vector<S> w_v;     // [N][Kp][2*band]  variable->factor
    std::vector<S> w_f;     // [N][Kp][2*band]  factor->variable
    std::vector<S> kappa;   // [N][Kp][3]
    std::vector<S> lambda;  // [N][Kp][band]    pair (k, k-d) keyed by larger index k

    int kp() const { return tied ? 1 : K; }
    int ki(int k) const { return tied ? 0 : k; }
    /// Offset j in {-band..-1, 1..band} -> slot in [0, 2*band).
    int jslot(int j) const { return j < 0 ? j + band : band + j - 1; }

    const S& wv(int n, int k, int j) const {
        return w_v[((std::size_t)n * kp() + ki(k)) * 2 * band + jslot(j)];
    }
    const S& wf(int n, int k, int j) const {
        return w_f[((std::size_t)n * kp() + ki(k)) * 2 * band + jslot(j)];
    }
    const S& kap(int n, int k, int i) const {
        return kappa[((std::size_t)n * kp() + ki(k)) * 3 + i];
    }
    /// lambda of the pair (k_hi, k_hi - d), d in [1, band].
    const S& lam(int n, int k_hi, int d) const {
        return lambda[((std::size_t)n * kp() + ki(k_hi)) * band + (d - 1)];
    }

    std::size_t count() const {
        return w_v.size() + w_f.size() + kappa.size() + lambda.size();
    }
};

using NbpParams = NbpT<double>;

/// All-ones weights: the plain sum-product detector. Allocated per-k unless
/// tied; count is N*K*(5*band+3) in the per-k case.
NbpParams identity_nbp(int N, int K, int band, bool tied);

/// Prior weights w_p^(n), n = 1..N (one unit's stage-linkage schedule).
struct StageLink {
    std::vector<double> w_p;
};

struct DetectorOutput {
    int K = 0;
    int M = 0;
    std::vector<double> log_app;  // K x M, each row log-normalized

    double app(int k, int m) const { return log_app[(std::size_t)k * M + m]; }
    /// argmax symbol decision (lowest index wins ties).
    int hard_symbol(int k) const {
        int best = 0;
        for (int m = 1; m < M; ++m)
            if (app(k, m) > app(k, best)) best = m;
        return best;
    }
};

// ---------------------------------------------------------------------------
// Templated core. S = double evaluates; S = ad::Var records for training.
// ---------------------------------------------------------------------------

template <class S>
void gfg_detect_core(const ObsT<S>& obs, const Constellation& cons,
                     const S* prior_log,  // K*M, normalized; never null
                     const NbpT<S>& nbp, const S* w_p /* N entries */, int iters,
                     std::vector<S>& out,                          // K*M normalized
                     std::vector<std::vector<S>>* trace = nullptr  // per-iteration readouts
) {
    const int K = obs.K, band = obs.band, M = cons.M;
    const int nj = 2 * band;
    const double inv_ss = 1.0 / obs.sigma_sq;

    if (iters < 0) throw std::invalid_argument("gfg_detect: negative iteration count");
    if (nbp.N < iters || nbp.N < 1)
        throw std::invalid_argument("gfg_detect: weights cover fewer iterations than requested");
    if (!nbp.tied && nbp.K != K) throw std::invalid_argument("gfg_detect: per-symbol weights sized for a different K");
    if (nbp.band != band) throw std::invalid_argument("gfg_detect: weights sized for a different band");

    // -- constellation constants ------------------------------------------
    std::vector<double> abs2(M);
    for (int m = 0; m < M; ++m) abs2[m] = std::norm(cons.points[m]);
    // z(a,b) = c_a * conj(c_b), needed by the pair potentials.
    std::vector<double> zre(M * M), zim(M * M);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            const cplx z = cons.points[a] * std::conj(cons.points[b]);
            zre[a * M + b] = z.real();
            zim[a * M + b] = z.imag();
        }

    // -- iteration-independent per-symbol statistics ------------------------
    // u[k,a] = 2 Re{x~_k c_a^*},  vdiag[k,a] = |c_a|^2 Re{G~_{k,k}}
    std::vector<S> u((std::size_t)K * M), vdiag((std::size_t)K * M);
    for (int k = 0; k < K; ++k) {
        const Cx<S>& xk = obs.x[k];
        const S xs[2] = {xk.re, xk.im};
        const S& gkk = obs.gband(k, 0).re;
        for (int a = 0; a < M; ++a) {
            const double coefs[2] = {2.0 * cons.points[a].real(), 2.0 * cons.points[a].imag()};
            u[(std::size_t)k * M + a] = lin_comb(coefs, xs, 2);
            vdiag[(std::size_t)k * M + a] = mul_c(gkk, abs2[a]);
        }
    }

    // -- pair potentials (iteration-independent part) -----------------------
    // For pair (lo, hi = lo + d): jsum[(lo*band + d-1)*M*M + a*M + b] with
    // a = symbol of lo, b = symbol of hi equals
    //   -(1/sigma^2)(Re{G~_{hi,lo} c_a c_b^*} + Re{G~_{lo,hi} c_b c_a^*}).
    const std::size_t pair_stride = (std::size_t)M * M;
    std::vector<S> jsum;
    std::vector<char> pair_valid((std::size_t)K * band, 0);
    if (band > 0) {
        jsum.resize((std::size_t)K * band * pair_stride, sconst<S>(0.0));
        for (int lo = 0; lo < K; ++lo)
            for (int d = 1; d <= band; ++d) {
                const int hi = lo + d;
                if (hi >= K) continue;
                pair_valid[(std::size_t)lo * band + (d - 1)] = 1;
                const Cx<S>& g1 = obs.gband(hi, -d);  // G~_{hi,lo}
                const Cx<S>& g2 = obs.gband(lo, +d);  // G~_{lo,hi}
                const S xs[4] = {g1.re, g1.im, g2.re, g2.im};
                S* row = &jsum[((std::size_t)lo * band + (d - 1)) * pair_stride];
                for (int a = 0; a < M; ++a)
                    for (int b = 0; b < M; ++b) {
                        const double r = zre[a * M + b], i = zim[a * M + b];
                        const double coefs[4] = {-inv_ss * r, inv_ss * i, -inv_ss * r, -inv_ss * i};
                        row[a * M + b] = lin_comb(coefs, xs, 4);
                    }
            }
    }

    // -- neighbor lists ------------------------------------------------------
    std::vector<std::vector<int>> neigh(K);  // valid offsets j per symbol
    for (int k = 0; k < K; ++k)
        for (int j = -band; j <= band; ++j) {
            if (j == 0) continue;
            if (k + j < 0 || k + j >= K) continue;
            neigh[k].push_back(j);
        }

    // -- message buffers -----------------------------------------------------
    const S minit = sconst<S>(-std::log((double)M));
    std::vector<S> nu_prev((std::size_t)K * nj * M, minit);
    std::vector<S> nu_cur((std::size_t)K * nj * M, minit);
    std::vector<S> mu((std::size_t)K * nj * M, minit);
    std::vector<S> xi((std::size_t)K * M);
    std::vector<S> itld(jsum.size());
    auto msg = [&](std::vector<S>& buf, int k, int j) -> S* {
        return &buf[((std::size_t)k * nj + nbp.jslot(j)) * M];
    };

    std::vector<S> scratch_terms(2 * band + 1);
    std::vector<S> scratch_row(M), scratch_raw(M);

    auto compute_xi = [&](int n) {
        for (int k = 0; k < K; ++k) {
            const S& k1 = nbp.kap(n, k, 0);
            const S& k2 = nbp.kap(n, k, 1);
            const S& k3 = nbp.kap(n, k, 2);
            for (int a = 0; a < M; ++a) {
                const std::size_t ka = (std::size_t)k * M + a;
                const S f = mul_c(k1 * (k2 * u[ka] - k3 * vdiag[ka]), inv_ss);
                xi[ka] = w_p[n] * prior_log[ka] + f;
            }
        }
    };

    auto readout = [&](const std::vector<S>& nu, std::vector<S>& dst) {
        dst.resize((std::size_t)K * M);
        for (int k = 0; k < K; ++k) {
            for (int a = 0; a < M; ++a) {
                int cnt = 0;
                scratch_terms[cnt++] = xi[(std::size_t)k * M + a];
                for (int j : neigh[k])
                    scratch_terms[cnt++] = nu[((std::size_t)k * nj + nbp.jslot(j)) * M + a];
                scratch_row[a] = sum_list(scratch_terms.data(), cnt);
            }
            const S z = lse_reduce(scratch_row.data(), M);
            for (int a = 0; a < M; ++a) dst[(std::size_t)k * M + a] = scratch_row[a] - z;
        }
    };

    for (int n = 0; n < iters; ++n) {
        compute_xi(n);

        // variable -> factor (built from nu_prev)
        for (int k = 0; k < K; ++k) {
            if (neigh[k].empty()) continue;
            // total = xi + sum of all incoming nu; each outgoing message
            // subtracts its own incoming one (linear-in-band trick).
            for (int a = 0; a < M; ++a) {
                int cnt = 0;
                scratch_terms[cnt++] = xi[(std::size_t)k * M + a];
                for (int j : neigh[k]) scratch_terms[cnt++] = msg(nu_prev, k, j)[a];
                scratch_row[a] = sum_list(scratch_terms.data(), cnt);
            }
            for (int j : neigh[k]) {
                const S* nin = msg(nu_prev, k, j);
                S* mout = msg(mu, k, j);
                const S& w = nbp.wv(n, k, j);
                for (int a = 0; a < M; ++a) scratch_raw[a] = w * (scratch_row[a] - nin[a]);
                const S z = lse_reduce(scratch_raw.data(), M);
                for (int a = 0; a < M; ++a) mout[a] = sub_clamp_floor(scratch_raw[a], z, kMessageFloor);
            }
        }

        // iteration-n pair factors
        for (int lo = 0; lo < K; ++lo)
            for (int d = 1; d <= band; ++d) {
                const std::size_t p = (std::size_t)lo * band + (d - 1);
                if (!pair_valid[p]) continue;
                const S& lv = nbp.lam(n, lo + d, d);
                const S* src = &jsum[p * pair_stride];
                S* dst = &itld[p * pair_stride];
                for (int t = 0; t < (int)pair_stride; ++t) dst[t] = lv * src[t];
            }

        // factor -> variable
        for (int k = 0; k < K; ++k) {
            for (int j : neigh[k]) {
                const int l = k + j;
                const S* min = msg(mu, l, -j);
                const S& w = nbp.wf(n, k, j);
                S* nout = msg(nu_cur, k, j);
                const std::size_t p = j > 0 ? ((std::size_t)k * band + (j - 1))
                                            : ((std::size_t)l * band + (-j - 1));
                const S* tbl = &itld[p * pair_stride];
                for (int a = 0; a < M; ++a) {
                    // row of I~ with c_k = a: contiguous when k is the lower
                    // pair index, strided otherwise.
                    if (j > 0) {
                        scratch_raw[a] = w * max_star_pairs(tbl + (std::size_t)a * M, min, M);
                    } else {
                        for (int b = 0; b < M; ++b) scratch_row[b] = tbl[(std::size_t)b * M + a];
                        scratch_raw[a] = w * max_star_pairs(scratch_row.data(), min, M);
                    }
                }
                const S z = lse_reduce(scratch_raw.data(), M);
                for (int a = 0; a < M; ++a) nout[a] = sub_clamp_floor(scratch_raw[a], z, kMessageFloor);
            }
        }

        std::swap(nu_prev, nu_cur);
        if (trace) {
            trace->emplace_back();
            readout(nu_prev, trace->back());
        }
    }

    if (iters == 0) compute_xi(0);  // degenerate request: prior+factor readout
    readout(nu_prev, out);
}

// ---------------------------------------------------------------------------
// Plain evaluation wrappers.
// ---------------------------------------------------------------------------

/// Uniform log prior for K symbols over M points.
std::vector<double> uniform_prior(int K, int M);

DetectorOutput gfg_detect(const ObservationModel& obs, const Constellation& cons,
                          const std::vector<double>& prior_log,  // empty => uniform
                          const NbpParams& nbp, const StageLink& link, int iters,
                          std::vector<DetectorOutput>* trace = nullptr);

/// Plain sum-product detection on the matched-filter model (identity weights).
DetectorOutput ufg_detect(const ChannelTaps& taps, double sigma_sq, const std::vector<cplx>& y,
                          int K, const Constellation& cons, int boundary_index, int iters,
                          const std::vector<double>& prior_log = {},
                          std::vector<DetectorOutput>* trace = nullptr);

}  // namespace fgdet
