#include "fgdet/metrics.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace fgdet {

BitGroups make_bit_groups(const Constellation& cons) {
    BitGroups bg;
    bg.bits = cons.bits;
    bg.zero.resize(cons.bits);
    bg.one.resize(cons.bits);
    for (int m = 0; m < cons.M; ++m)
        for (int i = 0; i < cons.bits; ++i)
            (cons.label_bit(m, i) ? bg.one[i] : bg.zero[i]).push_back(m);
    return bg;
}

void count_bit_errors(const DetectorOutput& out, const std::vector<int>& true_symbols,
                      const Constellation& cons, ErrorCount& acc) {
    if ((int)true_symbols.size() != out.K)
        throw std::invalid_argument("count_bit_errors: symbol count mismatch");
    for (int k = 0; k < out.K; ++k) {
        const unsigned diff = (unsigned)(out.hard_symbol(k) ^ true_symbols[k]);
        acc.errors += std::popcount(diff);
        acc.bits += cons.bits;
    }
}

std::vector<double> bitwise_llrs(const DetectorOutput& out, const BitGroups& bg, double alpha,
                                 double clip_at) {
    std::vector<double> llr((std::size_t)out.K * bg.bits);
    bitwise_llrs_core<double>(out.log_app.data(), out.K, bg, alpha, clip_at, llr.data());
    return llr;
}

void LlrBank::add_block(const DetectorOutput& out, const std::vector<int>& true_symbols,
                        const Constellation& cons, const BitGroups& bg) {
    if (bits_per_symbol == 0) bits_per_symbol = bg.bits;
    if (bits_per_symbol != bg.bits) throw std::invalid_argument("LlrBank: mixed constellations");
    const std::vector<double> raw = bitwise_llrs(out, bg, 1.0, 1e300);
    llr.insert(llr.end(), raw.begin(), raw.end());
    bit.reserve(bit.size() + raw.size());
    for (int k = 0; k < out.K; ++k)
        for (int i = 0; i < bg.bits; ++i)
            bit.push_back((unsigned char)cons.label_bit(true_symbols[k], i));
}

double bmi_at(const LlrBank& bank, double alpha) {
    if (bank.llr.empty()) return 0.0;
    double penalty = 0.0;
    for (std::size_t t = 0; t < bank.llr.size(); ++t) {
        double l = alpha * bank.llr[t];
        l = std::min(kLlrClip, std::max(-kLlrClip, l));
        const double x = bank.bit[t] ? l : -l;
        // log2(1 + e^x), computed stably for either sign
        const double sp = x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
        penalty += sp * 1.4426950408889634;
    }
    return bank.bits_per_symbol - penalty / (double)bank.symbols();
}

AlphaResult optimize_alpha(const LlrBank& bank) {
    AlphaResult best;  // alpha = 1 evaluated first so exact ties keep it
    best.bmi = bmi_at(bank, 1.0);
    if (bank.llr.empty()) return best;

    constexpr int kGrid = 49;
    const double lo = std::log(0.05), hi = std::log(20.0);
    std::vector<double> cand;
    cand.reserve(kGrid);
    for (int i = 0; i < kGrid; ++i) cand.push_back(std::exp(lo + (hi - lo) * i / (kGrid - 1)));

    int best_i = -1;
    for (int i = 0; i < kGrid; ++i) {
        const double v = bmi_at(bank, cand[i]);
        if (v > best.bmi) {
            best = {cand[i], v};
            best_i = i;
        }
    }

    // Golden-section refinement between the neighbors of the best grid point
    // (around alpha = 1 when no grid point beat it).
    double a, b;
    if (best_i < 0) {
        a = best.alpha / 1.2;
        b = best.alpha * 1.2;
    } else {
        a = cand[std::max(0, best_i - 1)];
        b = cand[std::min(kGrid - 1, best_i + 1)];
    }
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
    double f1 = bmi_at(bank, x1), f2 = bmi_at(bank, x2);
    for (int it = 0; it < 40 && b - a > 1e-9; ++it) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = bmi_at(bank, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = bmi_at(bank, x2);
        }
    }
    const double xm = 0.5 * (a + b), fm = bmi_at(bank, xm);
    if (fm > best.bmi) best = {xm, fm};
    return best;
}

}  // namespace fgdet
