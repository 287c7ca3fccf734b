#pragma once

// Deep-unfolded detector built from weighted sum-product units arranged in a
// grid of S stages x B parallel branches. Every unit in stage s runs N'
// flooding iterations against the merged posterior of stage s-1 as its prior
// (stage 1 sees the uniform prior), and each unit owns its preprocessor taps
// and per-message weights. Branch posteriors merge multiplicatively:
//
//     ln P^_s(c_k) = sum_b ln P^_{s,b}(c_k) - lse_c sum_b ln P^_{s,b}(c)
//
// With one stage, one branch, and all-ones weights the grid collapses to the
// plain sum-product detector.

#include <cstdint>
#include <vector>

#include "fgdet/gfg.hpp"

namespace fgdet {

struct GapShape {
    int stages = 1;
    int branches = 1;
    int iters = 1;  // flooding iterations per unit
    PreprocMode mode = PreprocMode::Matched;
    int preproc_len = 0;  // preprocessor taps per unit (0 under Matched)
    BandPolicy policy = BandPolicy::Channel;
    bool tied = true;  // share weights across symbol positions
};

template <class S>
struct GapUnitT {
    PreT<S> pre;
    NbpT<S> nbp;
    std::vector<S> w_p;  // prior weight per iteration
};

template <class S>
struct GapParamsT {
    GapShape shape;
    std::vector<GapUnitT<S>> units;  // stage-major: units[s*branches + b]
};

using GapUnit = GapUnitT<double>;
using GapParams = GapParamsT<double>;

/// All-ones weights; preprocessor taps drawn iid standard normal per
/// component from a stream derived per unit index (s*B + b).
GapParams init_gap_params(const GapShape& shape, const ChannelTaps& taps, int K,
                          std::uint64_t seed);

std::size_t param_count(const GapParams& params);

// ---------------------------------------------------------------------------
// Templated core. S = double evaluates; S = ad::Var records for training.
// ---------------------------------------------------------------------------

template <class S>
void gap_detect_core(const ChannelTaps& taps, double sigma_sq, const std::vector<cplx>& y, int K,
                     const Constellation& cons, cplx boundary_point, const GapShape& shape,
                     const std::vector<GapUnitT<S>>& units,
                     std::vector<S>& out,                              // K*M normalized
                     std::vector<std::vector<S>>* stage_out = nullptr  // merged posterior per stage
) {
    const int S_ = shape.stages, B = shape.branches, M = cons.M;
    if ((int)units.size() != S_ * B) throw std::invalid_argument("gap_detect: unit grid size mismatch");
    if (S_ < 1 || B < 1) throw std::invalid_argument("gap_detect: need at least one stage and branch");

    std::vector<ObsT<S>> obs;
    obs.reserve(units.size());
    for (const auto& unit : units)
        obs.push_back(build_observation_t<S>(taps, sigma_sq, y, K, unit.pre, shape.policy,
                                             boundary_point));

    std::vector<S> prior((std::size_t)K * M, sconst<S>(-std::log((double)M)));
    std::vector<std::vector<S>> branch_out(B);
    std::vector<S> terms(B), row(M);

    for (int s = 0; s < S_; ++s) {
        for (int b = 0; b < B; ++b) {
            const int u = s * B + b;
            gfg_detect_core<S>(obs[u], cons, prior.data(), units[u].nbp, units[u].w_p.data(),
                               shape.iters, branch_out[b]);
        }
        if (B == 1) {
            prior = branch_out[0];
        } else {
            for (int k = 0; k < K; ++k) {
                for (int a = 0; a < M; ++a) {
                    for (int b = 0; b < B; ++b) terms[b] = branch_out[b][(std::size_t)k * M + a];
                    row[a] = sum_list(terms.data(), B);
                }
                const S z = lse_reduce(row.data(), M);
                for (int a = 0; a < M; ++a) prior[(std::size_t)k * M + a] = row[a] - z;
            }
        }
        if (stage_out) stage_out->push_back(prior);
    }
    out = prior;
}

/// Plain evaluation wrapper.
DetectorOutput gap_detect(const ChannelTaps& taps, double sigma_sq, const std::vector<cplx>& y,
                          int K, const Constellation& cons, int boundary_index,
                          const GapParams& params,
                          std::vector<DetectorOutput>* stage_trace = nullptr);

}  // namespace fgdet
