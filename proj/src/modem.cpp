#include "fgdet/modem.hpp"

#include <cmath>
#include <stdexcept>

namespace fgdet {

namespace {

// Square QAM with a reflected Gray code per axis. Amplitude levels are
// ascending (-(2^b - 1), ..., -1, +1, ..., +(2^b - 1)) before energy
// normalization; level index t carries Gray code t ^ (t >> 1).
Constellation make_square_qam(std::string_view name, int bits_per_axis) {
    const int m = 2 * bits_per_axis;
    const int levels = 1 << bits_per_axis;

    // Map Gray code -> level index.
    std::vector<int> level_of_gray(levels);
    for (int t = 0; t < levels; ++t) level_of_gray[t ^ (t >> 1)] = t;

    // Mean energy per axis of the unscaled grid.
    double axis_energy = 0.0;
    for (int t = 0; t < levels; ++t) {
        const double a = 2.0 * t - (levels - 1);
        axis_energy += a * a;
    }
    axis_energy /= levels;
    const double scale = 1.0 / std::sqrt(2.0 * axis_energy);

    Constellation c;
    c.name = std::string(name);
    c.bits = m;
    c.M = 1 << m;
    c.points.resize(c.M);
    for (int label = 0; label < c.M; ++label) {
        const int gray_i = label >> bits_per_axis;
        const int gray_q = label & (levels - 1);
        const double ai = 2.0 * level_of_gray[gray_i] - (levels - 1);
        const double aq = 2.0 * level_of_gray[gray_q] - (levels - 1);
        c.points[label] = {ai * scale, aq * scale};
    }
    return c;
}

}  // namespace

Constellation make_constellation(std::string_view name) {
    if (name == "bpsk") {
        Constellation c;
        c.name = "bpsk";
        c.M = 2;
        c.bits = 1;
        c.points = {{1.0, 0.0}, {-1.0, 0.0}};
        return c;
    }
    if (name == "qpsk") return make_square_qam(name, 1);
    if (name == "16qam") return make_square_qam(name, 2);
    if (name == "64qam") return make_square_qam(name, 3);
    throw std::invalid_argument("make_constellation: unknown name '" + std::string(name) +
                                "' (expected bpsk, qpsk, 16qam or 64qam)");
}

}  // namespace fgdet
