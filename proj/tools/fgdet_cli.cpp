// Command-line harness for the factor-graph symbol detectors.
//
//   fgdet sweep     run a detector grid over operating points, write CSV
//   fgdet train     fit detector parameters by gradient descent, save them
//   fgdet eval      evaluate a saved parameter file (sweep with it applied)
//   fgdet gradcheck validate the analytic gradient against central differences
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fgdet/checkpoint.hpp"
#include "fgdet/config.hpp"
#include "fgdet/rng.hpp"
#include "fgdet/sweep.hpp"
#include "fgdet/training.hpp"

namespace {

using namespace fgdet;

void write_rows(const std::string& out_path, const std::vector<SweepRow>& rows) {
    if (out_path.empty()) {
        write_csv(std::cout, rows);
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + out_path + "' for writing");
    write_csv(f, rows);
    if (!f) throw std::runtime_error("write to '" + out_path + "' failed");
}

int run_sweep_command(const std::string& config_path, const std::string& out_path,
                      const std::string& checkpoint, bool seed_given, std::uint64_t seed,
                      bool timing, int threads, bool require_checkpoint) {
    SweepConfig config = load_sweep_config(config_path);
    if (seed_given) config.seed = seed;
    if (!checkpoint.empty()) config.checkpoint = checkpoint;
    if (require_checkpoint && config.checkpoint.empty())
        throw ConfigError("config: eval needs a parameter file (--checkpoint)");
    write_rows(out_path, run_sweep(config, timing, threads));
    return 0;
}

int run_train_command(const std::string& config_path, const std::string& checkpoint_out,
                      bool seed_given, std::uint64_t seed, int threads) {
    TrainJobConfig config = load_train_config(config_path);
    if (seed_given) config.seed = seed;

    const ChannelTaps taps = parse_channel(config.channel);
    const Constellation cons = make_constellation(config.constellation);
    if (config.boundary_index < 0 || config.boundary_index >= cons.M)
        throw ConfigError("config: boundary_index out of range for the constellation");

    TrainSetup setup;
    setup.taps = taps;
    setup.cons = cons;
    setup.sigma_sq = noise_sigma_sq(taps, config.ebno_db, cons.bits);
    setup.K = config.K;
    setup.boundary_index = config.boundary_index;
    setup.shape = config.shape;
    setup.multiloss = config.multiloss;

    GapParams init;
    if (config.init_checkpoint.empty()) {
        init = init_gap_params(config.shape, taps, config.K,
                               derive_seed(config.seed, kInitStream));
    } else {
        const Checkpoint warm = load_checkpoint(config.init_checkpoint);
        if (warm.L != taps.L())
            throw std::runtime_error("train: warm-start file was made for a different channel");
        if (!warm.shape.tied && warm.K != config.K)
            throw std::runtime_error("train: untied warm-start file was made for a different K");
        init = warm.params;
        setup.shape = warm.shape;
    }

    TrainOptions opt;
    opt.steps = config.steps;
    opt.blocks_per_step = config.blocks_per_step;
    opt.data_seed = derive_seed(config.seed, kDataStream);
    opt.lr = config.lr;
    opt.taps_only = config.taps_only;
    opt.threads = threads;
    const int every = std::max(1, config.steps / 20);
    opt.on_step = [&](int step, double loss) {
        if (step % every == 0 || step == config.steps)
            std::printf("step %5d  loss % .6f\n", step, loss);
    };

    const TrainResult result = train_gap(setup, flatten_params(init), opt);

    Checkpoint ck;
    ck.shape = setup.shape;
    ck.K = config.K;
    ck.L = taps.L();
    ck.params = unflatten_params(setup.shape, taps, config.K, result.x);
    save_checkpoint(checkpoint_out, ck);

    EvalOptions ev;
    ev.blocks = config.eval_blocks;
    ev.seed = derive_seed(config.seed, kEvalStream);
    const EvalResult holdout = evaluate_gap(setup, ck.params, ev);
    std::printf("holdout  ber %.6e  bmi %.6f  alpha %.4f  (%zu bits, %d blocks)\n", holdout.ber,
                holdout.bmi, holdout.alpha, holdout.bits, config.eval_blocks);
    std::printf("saved %s\n", checkpoint_out.c_str());
    return 0;
}

int run_gradcheck_command(const std::string& config_path, bool seed_given, std::uint64_t seed,
                          int coords, double fd_step, double tol, int data_blocks, int threads) {
    TrainJobConfig config = load_train_config(config_path);
    if (seed_given) config.seed = seed;

    const ChannelTaps taps = parse_channel(config.channel);
    const Constellation cons = make_constellation(config.constellation);
    TrainSetup setup;
    setup.taps = taps;
    setup.cons = cons;
    setup.sigma_sq = noise_sigma_sq(taps, config.ebno_db, cons.bits);
    setup.K = config.K;
    setup.boundary_index = config.boundary_index;
    setup.shape = config.shape;
    setup.multiloss = config.multiloss;

    const GapParams params = init_gap_params(config.shape, taps, config.K,
                                             derive_seed(config.seed, kInitStream));
    std::vector<TransmissionBlock> blocks((std::size_t)data_blocks);
    for (int d = 0; d < data_blocks; ++d) {
        Rng rng(derive_seed(derive_seed(config.seed, kDataStream), (std::uint64_t)d));
        blocks[d] = transmit(taps, cons, setup.sigma_sq, config.K, config.boundary_index, rng);
    }

    const GradCheckReport rep = gradient_check(setup, flatten_params(params), blocks, coords,
                                               fd_step, tol, derive_seed(config.seed, 0x7069636b),
                                               threads);
    std::printf("gradcheck  tested %d  failures %d  worst rel %.3e (coord %d: analytic % .6e, "
                "numeric % .6e)\n",
                rep.tested, rep.failures, rep.worst_rel, rep.worst_index, rep.worst_analytic,
                rep.worst_numeric);
    if (!rep.passed(tol)) {
        std::fprintf(stderr, "gradcheck failed\n");
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"factor-graph symbol detection on linear ISI channels"};
    app.require_subcommand(1);

    std::string config_path, out_path, checkpoint;
    std::uint64_t seed = 0;
    bool timing = true;
    int threads = 1;
    int coords = 200, gc_blocks = 2;
    double fd_step = 1e-5, tol = 1e-4;

    CLI::App* sweep = app.add_subcommand("sweep", "simulate detectors over operating points");
    sweep->add_option("--config", config_path, "sweep description (JSON)")->required();
    sweep->add_option("--out", out_path, "output CSV path (default: stdout)");
    sweep->add_option("--checkpoint", checkpoint, "trained parameters for gfg/gap");
    CLI::Option* sweep_seed = sweep->add_option("--seed", seed, "override the config seed");
    sweep->add_option("--timing", timing, "record wall time per row (off for stable output)");
    sweep->add_option("--threads", threads, "worker threads (results are thread-count invariant)");

    CLI::App* train = app.add_subcommand("train", "fit detector parameters");
    train->add_option("--config", config_path, "training description (JSON)")->required();
    train->add_option("--checkpoint", checkpoint, "where to save the trained parameters")
        ->required();
    CLI::Option* train_seed = train->add_option("--seed", seed, "override the config seed");
    train->add_option("--threads", threads, "worker threads (results are thread-count invariant)");

    CLI::App* eval = app.add_subcommand("eval", "evaluate saved parameters");
    eval->add_option("--config", config_path, "sweep description (JSON)")->required();
    eval->add_option("--checkpoint", checkpoint, "parameter file to evaluate")->required();
    eval->add_option("--out", out_path, "output CSV path (default: stdout)");
    CLI::Option* eval_seed = eval->add_option("--seed", seed, "override the config seed");
    eval->add_option("--timing", timing, "record wall time per row (off for stable output)");
    eval->add_option("--threads", threads, "worker threads (results are thread-count invariant)");

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "validate gradients by differences");
    gradcheck->add_option("--config", config_path, "training description (JSON)")->required();
    CLI::Option* gc_seed = gradcheck->add_option("--seed", seed, "override the config seed");
    gradcheck->add_option("--coords", coords, "number of coordinates to test");
    gradcheck->add_option("--step", fd_step, "central-difference step");
    gradcheck->add_option("--tol", tol, "relative-error tolerance");
    gradcheck->add_option("--blocks", gc_blocks, "data blocks in the test objective");
    gradcheck->add_option("--threads", threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sweep->parsed())
            return run_sweep_command(config_path, out_path, checkpoint, sweep_seed->count() > 0,
                                     seed, timing, threads, false);
        if (train->parsed())
            return run_train_command(config_path, checkpoint, train_seed->count() > 0, seed,
                                     threads);
        if (eval->parsed())
            return run_sweep_command(config_path, out_path, checkpoint, eval_seed->count() > 0,
                                     seed, timing, threads, true);
        if (gradcheck->parsed())
            return run_gradcheck_command(config_path, gc_seed->count() > 0, seed, coords, fd_step,
                                         tol, gc_blocks, threads);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
