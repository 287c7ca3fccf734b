#pragma once

// Constellations and bit labeling.
//
// A constellation is an indexed list of unit-mean-energy complex points;
// the index *is* the bit label (bits read MSB-first). Square QAM uses a
// reflected Gray code independently per axis: a label's first half selects
// the in-phase level, the second half the quadrature level, so axis-adjacent
// points differ in exactly one bit.

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace fgdet {

struct Constellation {
    std::string name;
    int M = 0;     // number of points
    int bits = 0;  // log2(M)
    std::vector<std::complex<double>> points;  // points[label]

    /// Bit i (0-based, MSB first) of a point's label.
    int label_bit(int label, int i) const { return (label >> (bits - 1 - i)) & 1; }
};

/// Supported names: "bpsk", "qpsk", "16qam", "64qam".
/// BPSK is pinned to points {+1, -1} with labels {0, 1}.
/// Every constellation has E{|c|^2} = 1 (within 1e-12).
Constellation make_constellation(std::string_view name);

}  // namespace fgdet
