#include "fgdet/observation.hpp"

namespace fgdet {

ObservationModel build_observation(const ChannelTaps& taps, double sigma_sq,
                                   const std::vector<cplx>& y, int K, const Preprocessor& pre,
                                   BandPolicy policy, cplx boundary_point) {
    return build_observation_t<double>(taps, sigma_sq, y, K, pre, policy, boundary_point);
}

}  // namespace fgdet
