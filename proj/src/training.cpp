#include "fgdet/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "fgdet/autodiff.hpp"
#include "fgdet/rng.hpp"

namespace fgdet {

namespace {

struct UnitSizes {
    std::size_t nv, nf, nk, nl, nwp, ntaps;  // vector lengths within one unit
    std::size_t total() const { return nv + nf + nk + nl + nwp + 2 * ntaps; }
};

UnitSizes unit_sizes(const GapShape& shape, const ChannelTaps& taps, int K) {
    const int band = observation_band(taps, shape.mode, shape.preproc_len, shape.policy);
    const std::size_t kp = shape.tied ? 1 : (std::size_t)K;
    const std::size_t n = (std::size_t)shape.iters;
    return {n * kp * 2 * band, n * kp * 2 * band, n * kp * 3, n * kp * band, n,
            (std::size_t)shape.preproc_len};
}

}  // namespace

std::size_t flat_param_count(const GapShape& shape, const ChannelTaps& taps, int K) {
    return (std::size_t)shape.stages * shape.branches * unit_sizes(shape, taps, K).total();
}

std::vector<double> flatten_params(const GapParams& params) {
    std::vector<double> x;
    for (const auto& u : params.units) {
        x.insert(x.end(), u.nbp.w_v.begin(), u.nbp.w_v.end());
        x.insert(x.end(), u.nbp.w_f.begin(), u.nbp.w_f.end());
        x.insert(x.end(), u.nbp.kappa.begin(), u.nbp.kappa.end());
        x.insert(x.end(), u.nbp.lambda.begin(), u.nbp.lambda.end());
        x.insert(x.end(), u.w_p.begin(), u.w_p.end());
        for (const auto& t : u.pre.taps) {
            x.push_back(t.re);
            x.push_back(t.im);
        }
    }
    return x;
}

GapParams unflatten_params(const GapShape& shape, const ChannelTaps& taps, int K,
                           const std::vector<double>& x) {
    if (x.size() != flat_param_count(shape, taps, K))
        throw std::invalid_argument("unflatten_params: flat vector length mismatch");
    GapParams p = init_gap_params(shape, taps, K, 0);
    std::size_t at = 0;
    auto take = [&](std::vector<double>& dst) {
        for (auto& v : dst) v = x[at++];
    };
    for (auto& u : p.units) {
        take(u.nbp.w_v);
        take(u.nbp.w_f);
        take(u.nbp.kappa);
        take(u.nbp.lambda);
        take(u.w_p);
        for (auto& t : u.pre.taps) {
            t.re = x[at++];
            t.im = x[at++];
        }
    }
    return p;
}

std::vector<char> preproc_taps_mask(const GapShape& shape, const ChannelTaps& taps, int K) {
    const UnitSizes sz = unit_sizes(shape, taps, K);
    std::vector<char> mask(flat_param_count(shape, taps, K), 0);
    const std::size_t units = (std::size_t)shape.stages * shape.branches;
    for (std::size_t u = 0; u < units; ++u) {
        const std::size_t base = u * sz.total() + sz.nv + sz.nf + sz.nk + sz.nl + sz.nwp;
        for (std::size_t t = 0; t < 2 * sz.ntaps; ++t) mask[base + t] = 1;
    }
    return mask;
}

namespace {

/// Pushes one leaf per flat parameter, in flat order, onto the active tape
/// (which must be empty so leaf ids equal parameter indices).
GapParamsT<ad::Var> bind_gap_params(const GapShape& shape, const ChannelTaps& taps, int K,
                                    const std::vector<double>& x, ad::Tape& tape) {
    const UnitSizes sz = unit_sizes(shape, taps, K);
    const int band = observation_band(taps, shape.mode, shape.preproc_len, shape.policy);
    if (x.size() != flat_param_count(shape, taps, K))
        throw std::invalid_argument("bind_gap_params: flat vector length mismatch");
    if (tape.size() != 0) throw std::logic_error("bind_gap_params: tape must start empty");

    GapParamsT<ad::Var> p;
    p.shape = shape;
    p.units.resize((std::size_t)shape.stages * shape.branches);
    std::size_t at = 0;
    auto take = [&](std::vector<ad::Var>& dst, std::size_t n) {
        dst.resize(n);
        for (auto& v : dst) v = {tape.leaf(x[at++])};
    };
    for (auto& u : p.units) {
        u.nbp.N = shape.iters;
        u.nbp.K = shape.tied ? 1 : K;
        u.nbp.band = band;
        u.nbp.tied = shape.tied;
        take(u.nbp.w_v, sz.nv);
        take(u.nbp.w_f, sz.nf);
        take(u.nbp.kappa, sz.nk);
        take(u.nbp.lambda, sz.nl);
        take(u.w_p, sz.nwp);
        u.pre.mode = shape.mode;
        u.pre.taps.resize(sz.ntaps);
        for (auto& t : u.pre.taps) {
            t.re = {tape.leaf(x[at++])};
            t.im = {tape.leaf(x[at++])};
        }
    }
    return p;
}

}  // namespace

LossResult loss_and_gradient(const TrainSetup& setup, const std::vector<double>& x,
                             const std::vector<TransmissionBlock>& blocks, bool want_grad,
                             int threads) {
    if (blocks.empty()) throw std::invalid_argument("loss_and_gradient: no blocks");
    const std::size_t P = x.size();
    const BitGroups bg = make_bit_groups(setup.cons);
    const int stages = setup.shape.stages;
    const double scale =
        1.0 / ((double)blocks.size() * setup.K * (setup.multiloss ? stages : 1));
    const cplx bpt = setup.cons.points.at(setup.boundary_index);

    std::vector<double> penalties(blocks.size(), 0.0);
    std::vector<std::vector<double>> grads(want_grad ? blocks.size() : 0);

    // Each block records on its own tape; a worker owns a reusable tape and
    // handles blocks round-robin so per-block results never depend on the
    // thread count.
    auto worker = [&](int first, int stride) {
        ad::Tape tape;
        ad::TapeScope scope(tape);
        std::vector<ad::Var> out;
        std::vector<std::vector<ad::Var>> stage_out;
        for (std::size_t b = (std::size_t)first; b < blocks.size(); b += (std::size_t)stride) {
            tape.clear();
            stage_out.clear();
            const GapParamsT<ad::Var> params =
                bind_gap_params(setup.shape, setup.taps, setup.K, x, tape);
            gap_detect_core<ad::Var>(setup.taps, setup.sigma_sq, blocks[b].y, setup.K, setup.cons,
                                     bpt, setup.shape, params.units, out,
                                     setup.multiloss ? &stage_out : nullptr);
            ad::Var root;
            if (setup.multiloss) {
                std::vector<ad::Var> roots(stages);
                for (int s = 0; s < stages; ++s)
                    roots[s] = bmi_penalty_core<ad::Var>(stage_out[s].data(), setup.K, bg,
                                                         blocks[b].symbols.data(), 1.0, kLlrClip);
                root = sum_list(roots.data(), stages);
            } else {
                root = bmi_penalty_core<ad::Var>(out.data(), setup.K, bg,
                                                 blocks[b].symbols.data(), 1.0, kLlrClip);
            }
            penalties[b] = tape.val(root.i);
            if (want_grad) {
                tape.backward(root.i);
                grads[b].resize(P);
                for (std::size_t i = 0; i < P; ++i) grads[b][i] = tape.adj((std::int32_t)i);
            }
        }
    };
    const int nt = std::max(1, std::min<int>(threads, (int)blocks.size()));
    if (nt == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve((std::size_t)nt);
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker, t, nt);
        for (auto& th : pool) th.join();
    }

    LossResult res;
    if (want_grad) res.grad.assign(P, 0.0);
    double penalty_total = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {  // merge in block order
        penalty_total += penalties[b];
        if (want_grad)
            for (std::size_t i = 0; i < P; ++i) res.grad[i] += grads[b][i] * scale;
    }
    res.loss = -(double)setup.cons.bits + penalty_total * scale;
    return res;
}

void Adam::step(std::vector<double>& x, const std::vector<double>& g,
                const std::vector<char>* mask) {
    if (g.size() != x.size()) throw std::invalid_argument("adam: gradient length mismatch");
    if (m.empty()) {
        m.assign(x.size(), 0.0);
        v.assign(x.size(), 0.0);
    }
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, (double)t);
    const double bc2 = 1.0 - std::pow(beta2, (double)t);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        x[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

TrainResult train_gap(const TrainSetup& setup, const std::vector<double>& x0,
                      const TrainOptions& opt) {
    std::vector<double> x = x0;
    Adam adam;
    adam.lr = opt.lr;
    std::vector<char> mask;
    if (opt.taps_only) {
        mask = preproc_taps_mask(setup.shape, setup.taps, setup.K);
        if (std::find(mask.begin(), mask.end(), 1) == mask.end())
            throw std::invalid_argument("train_gap: taps-only training with no preprocessor taps");
    }

    TrainResult res;
    std::vector<TransmissionBlock> blocks((std::size_t)opt.blocks_per_step);
    for (int step = 0; step < opt.steps; ++step) {
        for (int d = 0; d < opt.blocks_per_step; ++d) {
            Rng rng(derive_seed(opt.data_seed, (std::uint64_t)step * opt.blocks_per_step + d));
            blocks[d] = transmit(setup.taps, setup.cons, setup.sigma_sq, setup.K,
                                 setup.boundary_index, rng);
        }
        const LossResult lg = loss_and_gradient(setup, x, blocks, true, opt.threads);
        adam.step(x, lg.grad, opt.taps_only ? &mask : nullptr);
        res.loss_history.push_back(lg.loss);
        if (opt.on_step) opt.on_step(step + 1, lg.loss);
    }
    res.x = std::move(x);
    return res;
}

GradCheckReport gradient_check(const TrainSetup& setup, const std::vector<double>& x,
                               const std::vector<TransmissionBlock>& blocks, int max_coords,
                               double fd_step, double tol, std::uint64_t pick_seed, int threads) {
    const LossResult base = loss_and_gradient(setup, x, blocks, true, threads);
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    if ((std::size_t)max_coords < order.size()) {
        Rng rng(pick_seed);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[(std::size_t)rng.uniform_int((int)i)]);
        order.resize((std::size_t)max_coords);
    }

    GradCheckReport rep;
    std::vector<double> xp = x;
    for (const std::size_t i : order) {
        xp[i] = x[i] + fd_step;
        const double fp = loss_and_gradient(setup, xp, blocks, false, threads).loss;
        xp[i] = x[i] - fd_step;
        const double fm = loss_and_gradient(setup, xp, blocks, false, threads).loss;
        xp[i] = x[i];
        const double numeric = (fp - fm) / (2.0 * fd_step);
        const double analytic = base.grad[i];
        const double rel = std::abs(analytic - numeric) /
                           std::max({1.0, std::abs(analytic), std::abs(numeric)});
        ++rep.tested;
        if (rel > rep.worst_rel) {
            rep.worst_rel = rel;
            rep.worst_index = (int)i;
            rep.worst_analytic = analytic;
            rep.worst_numeric = numeric;
        }
        if (rel > tol) ++rep.failures;
    }
    return rep;
}

EvalResult evaluate_gap(const TrainSetup& setup, const GapParams& params, const EvalOptions& opt) {
    const BitGroups bg = make_bit_groups(setup.cons);
    ErrorCount errs;
    LlrBank bank;
    for (int e = 0; e < opt.blocks; ++e) {
        Rng rng(derive_seed(opt.seed, (std::uint64_t)e));
        const TransmissionBlock blk =
            transmit(setup.taps, setup.cons, setup.sigma_sq, setup.K, setup.boundary_index, rng);
        const DetectorOutput out = gap_detect(setup.taps, setup.sigma_sq, blk.y, setup.K,
                                              setup.cons, setup.boundary_index, params);
        count_bit_errors(out, blk.symbols, setup.cons, errs);
        bank.add_block(out, blk.symbols, setup.cons, bg);
    }
    EvalResult res;
    res.bits = errs.bits;
    res.errors = errs.errors;
    res.ber = errs.rate();
    if (opt.optimize_scale) {
        const AlphaResult a = optimize_alpha(bank);
        res.alpha = a.alpha;
        res.bmi = a.bmi;
    } else {
        res.alpha = 1.0;
        res.bmi = bmi_at(bank, 1.0);
    }
    return res;
}

}  // namespace fgdet
