#pragma once

// Linear ISI channel with additive circular complex Gaussian noise.
//
// A block carries K information symbols c_1..c_K drawn from a constellation;
// the transmitted sequence is extended with L known boundary symbols on each
// side (č = [c_k] for k = 1-L .. K+L). The receiver sees
//
//     y_k = sum_{l=0}^{L} h_l č_{k-l} + w_k,   k = 1 .. K+L,
//     w_k ~ CN(0, sigma^2)  (total complex variance sigma^2).
//
// Equivalently y = H č with H the (K+L) x (K+2L) banded Toeplitz matrix
// whose entry (r, c) is h_{r-c+L} when that index is in [0, L].

#include <complex>
#include <string_view>
#include <vector>

#include "fgdet/modem.hpp"
#include "fgdet/rng.hpp"

namespace fgdet {

using cplx = std::complex<double>;

struct ChannelTaps {
    std::vector<cplx> h;  // h[0..L]
    int L() const { return (int)h.size() - 1; }
};

/// Reference channels by name: "proakis-a", "proakis-b", "proakis-c",
/// "proakis-b-mismatched". Throws on unknown names.
ChannelTaps channel_by_name(std::string_view name);

/// Accepts either a reference-channel name or an explicit tap list
/// "re,im;re,im;..." (the ",im" part may be omitted for real taps).
ChannelTaps parse_channel(std::string_view text);

/// Noise variance for a target Eb/N0: sigma^2 = ||h||^2 * Es / (m * 10^(dB/10))
/// with Es = 1 (unit-energy constellations) and m bits per symbol.
double noise_sigma_sq(const ChannelTaps& taps, double ebno_db, int bits_per_symbol);

/// Dense H for tests and small-problem oracles, shape (K+L) x (K+2L).
std::vector<std::vector<cplx>> convolution_matrix(const ChannelTaps& taps, int K);

/// Noiseless channel output for a full extended symbol-value sequence
/// (length K+2L); returns K+L samples.
std::vector<cplx> apply_channel(const ChannelTaps& taps, const std::vector<cplx>& extended);

struct TransmissionBlock {
    std::vector<int> symbols;  // K transmitted info symbol indices
    std::vector<cplx> y;       // K+L received samples
};

/// Draws K uniform symbols, clamps the 2L boundary positions to
/// points[boundary_index], convolves, and adds CN(0, sigma_sq) noise.
TransmissionBlock transmit(const ChannelTaps& taps, const Constellation& cons,
                           double sigma_sq, int K, int boundary_index, Rng& rng);

/// Extended symbol values for given info-symbol indices (boundary clamped).
std::vector<cplx> extend_symbols(const ChannelTaps& taps, const Constellation& cons,
                                 const std::vector<int>& symbols, int boundary_index);

}  // namespace fgdet
