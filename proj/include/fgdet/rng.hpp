#pragma once

// Deterministic random number generation.
//
// Every stochastic quantity in the library is produced by this wrapper so
// that a run is reproducible from a single master seed on any platform:
// std::mt19937_64 supplies raw 64-bit words with a standardized sequence,
// and the mappings to uniforms / Gaussians are spelled out here rather than
// delegated to implementation-defined <random> distributions.
//
// Seed scheme: independent streams (one per simulated block) are derived
// from the master seed with a counter,
//     stream_seed = splitmix64(splitmix64(master) ^ (GOLDEN * (counter+1)))
// which decorrelates nearby counters and never collides in practice.

#include <complex>
#include <cstdint>
#include <random>

namespace fgdet {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed for sub-stream `counter` of the stream identified by `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
    return splitmix64(splitmix64(master) ^ (0x9E3779B97F4A7C15ull * (counter + 1)));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on (0, 1]; never returns 0 so ln(u) is always finite.
    double uniform01() {
        return (double)((gen_() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (second value cached).
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform01()));
        const double t = 2.0 * 3.14159265358979323846 * uniform01();
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    /// Circularly symmetric complex Gaussian with E|w|^2 = var_total
    /// (variance var_total/2 per real component).
    std::complex<double> cgauss(double var_total) {
        const double s = std::sqrt(0.5 * var_total);
        const double re = s * gauss();
        const double im = s * gauss();
        return {re, im};
    }

    /// Uniform integer in [0, n). n is tiny (constellation sizes), so the
    /// modulo bias of ~n/2^64 is far below anything observable.
    int uniform_int(int n) {
        return (int)(gen_() % (std::uint64_t)n);
    }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fgdet
