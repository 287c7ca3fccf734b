#include "fgdet/channel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fgdet {

ChannelTaps channel_by_name(std::string_view name) {
    auto real_taps = [](std::initializer_list<double> v) {
        ChannelTaps t;
        for (double x : v) t.h.push_back({x, 0.0});
        return t;
    };
    if (name == "proakis-a")
        return real_taps({0.04, -0.05, 0.07, -0.21, -0.5, 0.72, 0.36, 0.0, 0.21, 0.03, 0.07});
    if (name == "proakis-b") return real_taps({0.407, 0.815, 0.407});
    if (name == "proakis-c") return real_taps({0.227, 0.46, 0.688, 0.46, 0.227});
    if (name == "proakis-b-mismatched") return real_taps({0.59, 0.76, 0.28});
    throw std::invalid_argument("channel_by_name: unknown channel '" + std::string(name) + "'");
}

ChannelTaps parse_channel(std::string_view text) {
    // Names contain letters; explicit tap lists do not.
    for (char ch : text)
        if (std::isalpha((unsigned char)ch)) return channel_by_name(text);

    ChannelTaps taps;
    std::stringstream ss{std::string(text)};
    std::string tap_text;
    while (std::getline(ss, tap_text, ';')) {
        if (tap_text.empty()) continue;
        double re = 0.0, im = 0.0;
        const auto comma = tap_text.find(',');
        try {
            if (comma == std::string::npos) {
                re = std::stod(tap_text);
            } else {
                re = std::stod(tap_text.substr(0, comma));
                im = std::stod(tap_text.substr(comma + 1));
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("parse_channel: bad tap '" + tap_text + "'");
        }
        taps.h.push_back({re, im});
    }
    if (taps.h.empty()) throw std::invalid_argument("parse_channel: no taps in '" + std::string(text) + "'");
    return taps;
}

double noise_sigma_sq(const ChannelTaps& taps, double ebno_db, int bits_per_symbol) {
    if (bits_per_symbol <= 0) throw std::invalid_argument("noise_sigma_sq: bits_per_symbol must be positive");
    double energy = 0.0;
    for (const cplx& h : taps.h) energy += std::norm(h);
    if (energy <= 0.0) throw std::invalid_argument("noise_sigma_sq: channel has zero energy");
    return energy / (bits_per_symbol * std::pow(10.0, ebno_db / 10.0));
}

std::vector<std::vector<cplx>> convolution_matrix(const ChannelTaps& taps, int K) {
    const int L = taps.L();
    std::vector<std::vector<cplx>> H(K + L, std::vector<cplx>(K + 2 * L, cplx{0.0, 0.0}));
    for (int r = 0; r < K + L; ++r)
        for (int c = 0; c < K + 2 * L; ++c) {
            const int l = r - c + L;
            if (l >= 0 && l <= L) H[r][c] = taps.h[l];
        }
    return H;
}

std::vector<cplx> apply_channel(const ChannelTaps& taps, const std::vector<cplx>& extended) {
    const int L = taps.L();
    const int K = (int)extended.size() - 2 * L;
    if (K < 1) throw std::invalid_argument("apply_channel: extended sequence shorter than 2L+1");
    std::vector<cplx> y(K + L);
    // y[r] (0-based) = sum_l h_l * č[r+L-l]; č index 0 corresponds to k = 1-L.
    for (int r = 0; r < K + L; ++r) {
        cplx acc{0.0, 0.0};
        for (int l = 0; l <= L; ++l) acc += taps.h[l] * extended[r + L - l];
        y[r] = acc;
    }
    return y;
}

std::vector<cplx> extend_symbols(const ChannelTaps& taps, const Constellation& cons,
                                 const std::vector<int>& symbols, int boundary_index) {
    const int L = taps.L();
    const int K = (int)symbols.size();
    if (boundary_index < 0 || boundary_index >= cons.M)
        throw std::invalid_argument("extend_symbols: boundary index out of range");
    std::vector<cplx> ext(K + 2 * L, cons.points[boundary_index]);
    for (int k = 0; k < K; ++k) ext[L + k] = cons.points[symbols[k]];
    return ext;
}

TransmissionBlock transmit(const ChannelTaps& taps, const Constellation& cons,
                           double sigma_sq, int K, int boundary_index, Rng& rng) {
    if (K < 1) throw std::invalid_argument("transmit: K must be positive");
    if (sigma_sq < 0.0) throw std::invalid_argument("transmit: negative noise variance");

    TransmissionBlock block;
    block.symbols.resize(K);
    for (int k = 0; k < K; ++k) block.symbols[k] = rng.uniform_int(cons.M);

    block.y = apply_channel(taps, extend_symbols(taps, cons, block.symbols, boundary_index));
    if (sigma_sq > 0.0)
        for (cplx& s : block.y) s += rng.cgauss(sigma_sq);
    return block;
}

}  // namespace fgdet
