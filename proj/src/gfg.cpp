#include "fgdet/gfg.hpp"

namespace fgdet {

NbpParams identity_nbp(int N, int K, int band, bool tied) {
    NbpParams p;
    p.N = N;
    p.K = tied ? 1 : K;
    p.band = band;
    p.tied = tied;
    const std::size_t kp = p.kp();
    p.w_v.assign((std::size_t)N * kp * 2 * band, 1.0);
    p.w_f.assign((std::size_t)N * kp * 2 * band, 1.0);
    p.kappa.assign((std::size_t)N * kp * 3, 1.0);
    p.lambda.assign((std::size_t)N * kp * band, 1.0);
    return p;
}

std::vector<double> uniform_prior(int K, int M) {
    return std::vector<double>((std::size_t)K * M, -std::log((double)M));
}

DetectorOutput gfg_detect(const ObservationModel& obs, const Constellation& cons,
                          const std::vector<double>& prior_log, const NbpParams& nbp,
                          const StageLink& link, int iters,
                          std::vector<DetectorOutput>* trace) {
    const std::vector<double> uni =
        prior_log.empty() ? uniform_prior(obs.K, cons.M) : std::vector<double>();
    const double* prior = prior_log.empty() ? uni.data() : prior_log.data();
    if (!prior_log.empty() && (int)prior_log.size() != obs.K * cons.M)
        throw std::invalid_argument("gfg_detect: prior size mismatch");
    if ((int)link.w_p.size() < std::max(1, iters))
        throw std::invalid_argument("gfg_detect: prior-weight schedule shorter than iteration count");

    DetectorOutput out;
    out.K = obs.K;
    out.M = cons.M;
    std::vector<std::vector<double>> raw_trace;
    gfg_detect_core<double>(obs, cons, prior, nbp, link.w_p.data(), iters, out.log_app,
                            trace ? &raw_trace : nullptr);
    if (trace) {
        trace->clear();
        for (auto& t : raw_trace) {
            DetectorOutput o;
            o.K = obs.K;
            o.M = cons.M;
            o.log_app = std::move(t);
            trace->push_back(std::move(o));
        }
    }
    return out;
}

DetectorOutput ufg_detect(const ChannelTaps& taps, double sigma_sq, const std::vector<cplx>& y,
                          int K, const Constellation& cons, int boundary_index, int iters,
                          const std::vector<double>& prior_log,
                          std::vector<DetectorOutput>* trace) {
    Preprocessor pre;
    pre.mode = PreprocMode::Matched;
    const ObservationModel obs = build_observation(taps, sigma_sq, y, K, pre, BandPolicy::Channel,
                                                   cons.points.at(boundary_index));
    NbpParams nbp = identity_nbp(std::max(1, iters), K, taps.L(), true);
    StageLink link;
    link.w_p.assign(std::max(1, iters), 1.0);
    return gfg_detect(obs, cons, prior_log, nbp, link, iters, trace);
}

}  // namespace fgdet
