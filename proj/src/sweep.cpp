#include "fgdet/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "fgdet/baselines.hpp"
#include "fgdet/checkpoint.hpp"
#include "fgdet/metrics.hpp"
#include "fgdet/rng.hpp"

namespace fgdet {

namespace {

struct BlockResult {
    DetectorOutput out;
    std::vector<int> symbols;
};

GapParams checkpoint_params_for(const Checkpoint& ck, const std::string& detector,
                                const ChannelTaps& taps, int K) {
    if (ck.L != taps.L())
        throw std::runtime_error("sweep: checkpoint was trained for a different channel memory");
    if (!ck.shape.tied && ck.K != K)
        throw std::runtime_error("sweep: untied checkpoint was trained for a different K");
    if (detector == "gfg" && (ck.shape.stages != 1 || ck.shape.branches != 1))
        throw std::runtime_error("sweep: gfg expects a single-unit checkpoint; use the gap detector");
    return ck.params;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& config, bool timing, int threads) {
    const ChannelTaps taps = parse_channel(config.channel);
    const Constellation cons = make_constellation(config.constellation);
    const BitGroups bg = make_bit_groups(cons);
    if (config.boundary_index < 0 || config.boundary_index >= cons.M)
        throw ConfigError("config: boundary_index out of range for the constellation");
    const int nt = std::max(1, threads);

    bool have_ck = false;
    Checkpoint ck;
    if (!config.checkpoint.empty()) {
        ck = load_checkpoint(config.checkpoint);
        have_ck = true;
    }

    std::vector<SweepRow> rows;
    for (std::size_t pi = 0; pi < config.ebno_db.size(); ++pi) {
        const double ebno = config.ebno_db[pi];
        const double sigma_sq = noise_sigma_sq(taps, ebno, cons.bits);
        const std::uint64_t point_seed = derive_seed(config.seed, (std::uint64_t)pi);

        for (const std::string& det : config.detectors) {
            GapParams params;
            if (det == "gap") {
                if (!have_ck) throw std::runtime_error("sweep: the gap detector needs a checkpoint");
                params = checkpoint_params_for(ck, det, taps, config.K);
            } else if (det == "gfg") {
                if (have_ck) {
                    params = checkpoint_params_for(ck, det, taps, config.K);
                } else {
                    std::fprintf(stderr,
                                 "note: gfg without a checkpoint uses identity parameters "
                                 "(equivalent to ufg)\n");
                    GapShape shape;
                    shape.iters = config.iters;
                    params = init_gap_params(shape, taps, config.K, 0);
                }
            }

            auto detect_block = [&](int d, BlockResult& res) {
                Rng rng(derive_seed(point_seed, (std::uint64_t)d));
                const TransmissionBlock blk =
                    transmit(taps, cons, sigma_sq, config.K, config.boundary_index, rng);
                if (det == "bcjr") {
                    res.out = bcjr_detect(taps, sigma_sq, blk.y, config.K, cons,
                                          config.boundary_index);
                } else if (det == "bruteforce") {
                    res.out = brute_force_map(taps, sigma_sq, blk.y, config.K, cons,
                                              config.boundary_index);
                } else if (det == "lmmse") {
                    res.out = lmmse_detect(taps, sigma_sq, blk.y, config.K, cons,
                                           config.boundary_index, config.lmmse_order);
                } else if (det == "ufg") {
                    res.out = ufg_detect(taps, sigma_sq, blk.y, config.K, cons,
                                         config.boundary_index, config.iters);
                } else {  // gfg / gap
                    res.out = gap_detect(taps, sigma_sq, blk.y, config.K, cons,
                                         config.boundary_index, params);
                }
                res.symbols = blk.symbols;
            };

            const auto t0 = std::chrono::steady_clock::now();
            ErrorCount errs;
            LlrBank bank;
            int blocks_run = 0;
            // Work proceeds in chunks so the stop test (enough blocks AND
            // enough bits) is applied block by block in order: the set of
            // merged blocks never depends on the thread count.
            const int chunk = std::max(16, 4 * nt);
            bool done = false;
            for (int base = 0; !done; base += chunk) {
                if (nt == 1) {
                    // Serial fast path: apply the stop test before each block
                    // so nothing is simulated only to be thrown away.
                    BlockResult res;
                    for (int i = 0; i < chunk; ++i) {
                        if (blocks_run >= config.blocks &&
                            (std::int64_t)errs.bits >= config.min_bits) {
                            done = true;
                            break;
                        }
                        detect_block(base + i, res);
                        count_bit_errors(res.out, res.symbols, cons, errs);
                        bank.add_block(res.out, res.symbols, cons, bg);
                        ++blocks_run;
                    }
                    if (blocks_run >= config.blocks && (std::int64_t)errs.bits >= config.min_bits)
                        done = true;
                    continue;
                }
                std::vector<BlockResult> results((std::size_t)chunk);
                std::vector<std::thread> pool;
                pool.reserve((std::size_t)nt);
                for (int t = 0; t < nt; ++t)
                    pool.emplace_back([&, t] {
                        for (int i = t; i < chunk; i += nt) detect_block(base + i, results[i]);
                    });
                for (auto& th : pool) th.join();
                for (int i = 0; i < chunk; ++i) {
                    if (blocks_run >= config.blocks && (std::int64_t)errs.bits >= config.min_bits) {
                        done = true;
                        break;
                    }
                    count_bit_errors(results[i].out, results[i].symbols, cons, errs);
                    bank.add_block(results[i].out, results[i].symbols, cons, bg);
                    ++blocks_run;
                }
                if (blocks_run >= config.blocks && (std::int64_t)errs.bits >= config.min_bits)
                    done = true;
            }

            SweepRow row;
            row.ebno_db = ebno;
            row.detector = det;
            row.ber = errs.rate();
            if (config.alpha == "golden") {
                const AlphaResult a = optimize_alpha(bank);
                row.alpha = a.alpha;
                row.bmi = a.bmi;
            } else {
                row.alpha = config.fixed_alpha;
                row.bmi = bmi_at(bank, config.fixed_alpha);
            }
            row.bits_counted = errs.bits;
            row.bit_errors = errs.errors;
            row.blocks = blocks_run;
            row.seed = config.seed;
            const auto t1 = std::chrono::steady_clock::now();
            row.wall_time_s = timing ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << kCsvHeader << '\n';
    char buf[256];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6g,%s,%.8e,%.8f,%.6f,%zu,%zu,%d,%llu,%.3f", r.ebno_db,
                      r.detector.c_str(), r.ber, r.bmi, r.alpha, r.bits_counted, r.bit_errors,
                      r.blocks, (unsigned long long)r.seed, r.wall_time_s);
        os << buf << '\n';
    }
}

}  // namespace fgdet
