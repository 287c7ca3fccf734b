#pragma once

// JSON experiment descriptions for the command-line harness. Parsing is
// strict: unknown keys, wrong types, and out-of-range values are reported as
// ConfigError so the caller can distinguish bad input from runtime failures.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgdet/gap.hpp"

namespace fgdet {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepConfig {
    std::string channel = "proakis-b";
    std::string constellation = "bpsk";
    int K = 500;
    int boundary_index = 0;
    std::vector<double> ebno_db = {10.0};
    std::vector<std::string> detectors = {"ufg"};
    int iters = 10;       // flooding iterations for untrained detectors
    int blocks = 100;     // simulated blocks per (point, detector)
    long long min_bits = 0;  // keep simulating past `blocks` until this many bits
    std::uint64_t seed = 1;
    std::string alpha = "golden";  // "golden" calibrates the LLR scale, "fixed" uses fixed_alpha
    double fixed_alpha = 1.0;
    std::string checkpoint;  // trained parameters for the gfg/gap detectors
    int lmmse_order = 30;
};

struct TrainJobConfig {
    std::string channel = "proakis-b";
    std::string constellation = "bpsk";
    int K = 64;
    double ebno_db = 10.0;
    int boundary_index = 0;
    GapShape shape;
    int steps = 500;
    int blocks_per_step = 25;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    bool taps_only = false;
    bool multiloss = false;
    std::string init_checkpoint;  // optional warm start
    int eval_blocks = 100;        // hold-out evaluation after training
};

SweepConfig sweep_config_from_json(const std::string& text);
TrainJobConfig train_config_from_json(const std::string& text);

SweepConfig load_sweep_config(const std::string& path);
TrainJobConfig load_train_config(const std::string& path);

}  // namespace fgdet
