#include "fgdet/gap.hpp"

#include "fgdet/rng.hpp"

namespace fgdet {

GapParams init_gap_params(const GapShape& shape, const ChannelTaps& taps, int K,
                          std::uint64_t seed) {
    if (shape.mode == PreprocMode::Matched && shape.preproc_len != 0)
        throw std::invalid_argument("init_gap_params: matched preprocessing takes no taps");
    if (shape.mode != PreprocMode::Matched && shape.preproc_len < 1)
        throw std::invalid_argument("init_gap_params: free preprocessing needs at least one tap");

    const int band = observation_band(taps, shape.mode, shape.preproc_len, shape.policy);
    GapParams p;
    p.shape = shape;
    p.units.resize((std::size_t)shape.stages * shape.branches);
    for (std::size_t u = 0; u < p.units.size(); ++u) {
        GapUnit& unit = p.units[u];
        unit.pre.mode = shape.mode;
        if (shape.preproc_len > 0) {
            Rng rng(derive_seed(seed, (std::uint64_t)u));
            unit.pre.taps.resize(shape.preproc_len);
            for (auto& t : unit.pre.taps) {
                t.re = rng.gauss();
                t.im = rng.gauss();
            }
        }
        unit.nbp = identity_nbp(shape.iters, K, band, shape.tied);
        unit.w_p.assign(shape.iters, 1.0);
    }
    return p;
}

std::size_t param_count(const GapParams& params) {
    std::size_t n = 0;
    for (const auto& unit : params.units)
        n += unit.nbp.count() + unit.w_p.size() + 2 * unit.pre.taps.size();
    return n;
}

DetectorOutput gap_detect(const ChannelTaps& taps, double sigma_sq, const std::vector<cplx>& y,
                          int K, const Constellation& cons, int boundary_index,
                          const GapParams& params, std::vector<DetectorOutput>* stage_trace) {
    DetectorOutput out;
    out.K = K;
    out.M = cons.M;
    std::vector<std::vector<double>> stages;
    gap_detect_core<double>(taps, sigma_sq, y, K, cons, cons.points.at(boundary_index),
                            params.shape, params.units, out.log_app,
                            stage_trace ? &stages : nullptr);
    if (stage_trace) {
        stage_trace->clear();
        for (auto& s : stages) {
            DetectorOutput o;
            o.K = K;
            o.M = cons.M;
            o.log_app = std::move(s);
            stage_trace->push_back(std::move(o));
        }
    }
    return out;
}

}  // namespace fgdet
