#pragma once

// Detection quality metrics: bit error counting on hard symbol decisions,
// bitwise LLR extraction from symbol posteriors, and the achievable-rate
// proxy (bitwise mutual information) with optional LLR scale calibration.

#include <cstddef>
#include <vector>

#include "fgdet/gfg.hpp"
#include "fgdet/modem.hpp"

namespace fgdet {

inline constexpr double kLlrClip = 50.0;

/// Symbol indices grouped by the value of each label bit.
struct BitGroups {
    int bits = 0;
    std::vector<std::vector<int>> zero, one;  // [bit] -> member symbols
};

BitGroups make_bit_groups(const Constellation& cons);

struct ErrorCount {
    std::size_t bits = 0, errors = 0;
    double rate() const { return bits ? (double)errors / (double)bits : 0.0; }
};

/// Bit errors between hard (argmax) decisions and the transmitted labels.
void count_bit_errors(const DetectorOutput& out, const std::vector<int>& true_symbols,
                      const Constellation& cons, ErrorCount& acc);

/// LLR of bit i of symbol k: clip(alpha * (lse_{bit=0} - lse_{bit=1}), +-clip_at).
/// Templated so the training tape can record the same computation.
template <class S>
void bitwise_llrs_core(const S* log_app, int K, const BitGroups& bg, double alpha, double clip_at,
                       S* out /* K * bits */) {
    const int M = (int)(bg.zero[0].size() + bg.one[0].size());
    std::vector<S> members(M);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < bg.bits; ++i) {
            const auto& z = bg.zero[i];
            const auto& o = bg.one[i];
            for (std::size_t t = 0; t < z.size(); ++t) members[t] = log_app[(std::size_t)k * M + z[t]];
            const S l0 = lse_reduce(members.data(), (int)z.size());
            for (std::size_t t = 0; t < o.size(); ++t) members[t] = log_app[(std::size_t)k * M + o[t]];
            const S l1 = lse_reduce(members.data(), (int)o.size());
            out[(std::size_t)k * bg.bits + i] = clip(mul_c(l0 - l1, alpha), -clip_at, clip_at);
        }
}

std::vector<double> bitwise_llrs(const DetectorOutput& out, const BitGroups& bg,
                                 double alpha = 1.0, double clip_at = kLlrClip);

/// Sum over symbols and bits of log2(1 + exp(-(-1)^b * llr)), the information
/// penalty whose per-symbol mean subtracted from m gives the BMI.
template <class S>
S bmi_penalty_core(const S* log_app, int K, const BitGroups& bg, const int* true_symbols,
                   double alpha, double clip_at) {
    std::vector<S> llr((std::size_t)K * bg.bits);
    bitwise_llrs_core(log_app, K, bg, alpha, clip_at, llr.data());
    std::vector<S> terms(llr.size());
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < bg.bits; ++i) {
            const std::size_t t = (std::size_t)k * bg.bits + i;
            // label bit i of the (index == label) symbol, MSB first
            const int b = (true_symbols[k] >> (bg.bits - 1 - i)) & 1;
            terms[t] = softplus_log2(b ? llr[t] : mul_c(llr[t], -1.0));
        }
    return sum_list(terms.data(), (int)terms.size());
}

/// Retains every (unscaled, unclipped) bit LLR with its transmitted bit so
/// the scale alpha can be calibrated after the fact.
struct LlrBank {
    int bits_per_symbol = 0;
    std::vector<double> llr;
    std::vector<unsigned char> bit;

    void add_block(const DetectorOutput& out, const std::vector<int>& true_symbols,
                   const Constellation& cons, const BitGroups& bg);
    std::size_t symbols() const { return bits_per_symbol ? llr.size() / bits_per_symbol : 0; }
};

/// BMI of the bank at a fixed LLR scale (clipping at +-kLlrClip after scaling).
double bmi_at(const LlrBank& bank, double alpha);

struct AlphaResult {
    double alpha = 1.0;
    double bmi = 0.0;
};

/// Maximizes bmi_at over alpha: coarse log-spaced grid on [0.05, 20] that
/// always contains alpha = 1, then golden-section refinement. The result is
/// never worse than the uncalibrated alpha = 1 value.
AlphaResult optimize_alpha(const LlrBank& bank);

}  // namespace fgdet
