#pragma once

// Monte-Carlo evaluation harness: runs each configured detector over the same
// simulated blocks at every operating point and reports BER / BMI rows in a
// fixed CSV layout.

#include <iosfwd>
#include <string>
#include <vector>

#include "fgdet/config.hpp"

namespace fgdet {

struct SweepRow {
    double ebno_db = 0.0;
    std::string detector;
    double ber = 0.0, bmi = 0.0, alpha = 1.0;
    std::size_t bits_counted = 0, bit_errors = 0;
    int blocks = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
};

/// Runs the full grid. With timing disabled every wall_time_s is written as
/// zero so repeated runs produce byte-identical output. Blocks may be
/// detected on worker threads; accumulation stays in block order, so the
/// rows are bit-identical for every thread count (timing aside).
std::vector<SweepRow> run_sweep(const SweepConfig& config, bool timing, int threads = 1);

inline constexpr const char* kCsvHeader =
    "ebno_db,detector,ber,bmi,alpha,bits_counted,bit_errors,blocks,seed,wall_time_s";

void write_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace fgdet
