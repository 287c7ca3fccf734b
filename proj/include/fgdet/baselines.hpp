#pragma once

// Reference detectors: exact MAP via the forward-backward (BCJR) recursion on
// the channel trellis, exhaustive-enumeration MAP for tiny blocks, and an
// unbiased LMMSE linear equalizer with Gaussian posterior approximation.

#include <vector>

#include "fgdet/channel.hpp"
#include "fgdet/gfg.hpp"
#include "fgdet/modem.hpp"

namespace fgdet {

/// Exact symbol-wise a posteriori probabilities on the ISI trellis
/// (M^L states, boundary-clamped initial/terminal state, forced trailing
/// branches). Throws if M^L exceeds 2^20 states.
DetectorOutput bcjr_detect(const ChannelTaps& taps, double sigma_sq, const std::vector<cplx>& y,
                           int K, const Constellation& cons, int boundary_index,
                           const std::vector<double>& prior_log = {});

/// Symbol-wise posteriors by summing the joint density over every candidate
/// block (M^K sequences). Oracle for small problems; throws above 2^20.
DetectorOutput brute_force_map(const ChannelTaps& taps, double sigma_sq,
                               const std::vector<cplx>& y, int K, const Constellation& cons,
                               int boundary_index, const std::vector<double>& prior_log = {});

/// FIR Wiener equalizer design: taps w (order+1 of them), decision delay
/// picked to maximize the output signal correlation b = r^H R^-1 r.
struct LmmseDesign {
    std::vector<cplx> w;  // combine as sum_i conj(w[i]) * y[k + delay - i]
    int delay = 0;
    double b = 0.0;  // in (0, 1); unbiased estimate divides by this
};

LmmseDesign lmmse_design(const ChannelTaps& taps, double sigma_sq, int order);

/// Linear equalization with boundary presubtraction, unbiased scaling, and a
/// Gaussian posterior whose variance comes from hard-decision remodulation.
DetectorOutput lmmse_detect(const ChannelTaps& taps, double sigma_sq, const std::vector<cplx>& y,
                            int K, const Constellation& cons, int boundary_index, int order = 30);

}  // namespace fgdet
