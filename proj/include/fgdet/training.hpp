#pragma once

// Gradient training of the detector-grid parameters. Every parameter lives in
// one flat vector (fixed canonical order), each optimization step replays the
// detector on a recording tape for a fresh batch of simulated blocks, and the
// objective is the negated bitwise mutual information of the final (or, for
// the multi-stage objective, every) merged posterior at unit LLR scale.

#include <cstdint>
#include <functional>
#include <vector>

#include "fgdet/channel.hpp"
#include "fgdet/gap.hpp"
#include "fgdet/metrics.hpp"

namespace fgdet {

struct TrainSetup {
    ChannelTaps taps;
    Constellation cons;
    double sigma_sq = 1.0;
    int K = 0;
    int boundary_index = 0;
    GapShape shape;
    bool multiloss = false;  // average the objective over every stage readout
};

// Canonical flat order: units stage-major; within a unit w_v, w_f, kappa,
// lambda, w_p, then preprocessor taps as re,im pairs.
std::size_t flat_param_count(const GapShape& shape, const ChannelTaps& taps, int K);
std::vector<double> flatten_params(const GapParams& params);
GapParams unflatten_params(const GapShape& shape, const ChannelTaps& taps, int K,
                           const std::vector<double>& x);
/// 1 exactly at the preprocessor-tap positions of the flat vector.
std::vector<char> preproc_taps_mask(const GapShape& shape, const ChannelTaps& taps, int K);

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Mean negated BMI over the given blocks (and stages, when multiloss), with
/// its gradient from one reverse sweep per block. Blocks are independent, so
/// they may be recorded on per-thread tapes; the merge runs in block order,
/// making the result bit-identical for every thread count.
LossResult loss_and_gradient(const TrainSetup& setup, const std::vector<double>& x,
                             const std::vector<TransmissionBlock>& blocks, bool want_grad = true,
                             int threads = 1);

struct Adam {
    double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> m, v;
    long long t = 0;

    /// One bias-corrected update; entries with a zero mask flag are frozen.
    void step(std::vector<double>& x, const std::vector<double>& g,
              const std::vector<char>* mask = nullptr);
};

struct TrainOptions {
    int steps = 500;
    int blocks_per_step = 25;
    std::uint64_t data_seed = 1;  // block d of step s uses substream s*D + d
    double lr = 1e-3;
    bool taps_only = false;
    int threads = 1;
    std::function<void(int step, double loss)> on_step;  // progress hook, step is 1-based
};

// Substream tags: one user-facing seed expands into non-colliding streams for
// parameter init, training data, and evaluation data.
inline constexpr std::uint64_t kInitStream = 0x696e6974;
inline constexpr std::uint64_t kDataStream = 0x64617461;
inline constexpr std::uint64_t kEvalStream = 0x6576616c;

struct TrainResult {
    std::vector<double> x;
    std::vector<double> loss_history;
};

TrainResult train_gap(const TrainSetup& setup, const std::vector<double>& x0,
                      const TrainOptions& opt);

struct GradCheckReport {
    int tested = 0, failures = 0;
    int worst_index = -1;
    double worst_rel = 0.0, worst_analytic = 0.0, worst_numeric = 0.0;
    bool passed(double tol) const { return tested > 0 && failures == 0 && worst_rel <= tol; }
};

/// Central-difference validation of the reverse-sweep gradient on a random
/// subset of coordinates; rel error uses max(1, |analytic|, |numeric|).
GradCheckReport gradient_check(const TrainSetup& setup, const std::vector<double>& x,
                               const std::vector<TransmissionBlock>& blocks, int max_coords,
                               double fd_step = 1e-5, double tol = 1e-4,
                               std::uint64_t pick_seed = 7, int threads = 1);

struct EvalOptions {
    int blocks = 100;
    std::uint64_t seed = 777;
    bool optimize_scale = true;  // calibrate the LLR scale on the evaluation set
};

struct EvalResult {
    double ber = 0.0, bmi = 0.0, alpha = 1.0;
    std::size_t bits = 0, errors = 0;
};

/// Hold-out metrics of a parameter set on freshly simulated blocks.
EvalResult evaluate_gap(const TrainSetup& setup, const GapParams& params, const EvalOptions& opt);

}  // namespace fgdet
