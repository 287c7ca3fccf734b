#include "fgdet/autodiff.hpp"

namespace fgdet::ad {

Tape*& active_tape() {
    thread_local Tape* tape = nullptr;
    return tape;
}

void Tape::backward(std::int32_t root) {
    assert(root >= 0 && (std::size_t)root < nodes_.size());
    adjs_.assign(vals_.size(), 0.0);
    adjs_[root] = 1.0;

    for (std::int32_t i = root; i >= 0; --i) {
        const double g = adjs_[i];
        if (g == 0.0) continue;
        const Node& nd = nodes_[i];
        switch (nd.op) {
            case Op::Leaf:
                break;
            case Op::Add:
                adjs_[nd.a] += g;
                adjs_[nd.b] += g;
                break;
            case Op::Sub:
                adjs_[nd.a] += g;
                adjs_[nd.b] -= g;
                break;
            case Op::Mul:
                adjs_[nd.a] += g * vals_[nd.b];
                adjs_[nd.b] += g * vals_[nd.a];
                break;
            case Op::AddC:
                adjs_[nd.a] += g;
                break;
            case Op::MulC:
                adjs_[nd.a] += g * nd.ca;
                break;
            case Op::MaxStar2: {
                const double v = vals_[i];
                if (std::isinf(v) && v < 0) break;  // both inputs -inf
                adjs_[nd.a] += g * std::exp(vals_[nd.a] - v);
                adjs_[nd.b] += g * std::exp(vals_[nd.b] - v);
                break;
            }
            case Op::SubClampFloor:
                if (vals_[i] > nd.ca) {
                    adjs_[nd.a] += g;
                    adjs_[nd.b] -= g;
                }
                break;
            case Op::Clip:
                if (vals_[i] > nd.ca && vals_[i] < nd.cb) adjs_[nd.a] += g;
                break;
            case Op::SoftplusLog2: {
                // d/dx log2(1+e^x) = sigmoid(x)/ln 2
                const double x = vals_[nd.a];
                const double sig = x > 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                           : std::exp(x) / (1.0 + std::exp(x));
                adjs_[nd.a] += g * sig * 1.4426950408889634;
                break;
            }
            case Op::SumN: {
                const std::int32_t* xs = args_.data() + nd.a;
                for (int t = 0; t < nd.b; ++t) adjs_[xs[t]] += g;
                break;
            }
            case Op::MaxStarN: {
                const double v = vals_[i];
                if (std::isinf(v) && v < 0) break;
                const std::int32_t* xs = args_.data() + nd.a;
                for (int t = 0; t < nd.b; ++t) adjs_[xs[t]] += g * std::exp(vals_[xs[t]] - v);
                break;
            }
            case Op::MaxStarPairsN: {
                const std::int32_t* xs = args_.data() + nd.a;  // interleaved (x, y)
                const double* w = parts_.data() + nd.p;
                for (int t = 0; t < nd.b; ++t) {
                    const double gw = g * w[t];
                    adjs_[xs[2 * t]] += gw;
                    adjs_[xs[2 * t + 1]] += gw;
                }
                break;
            }
            case Op::LinCombN: {
                const std::int32_t* xs = args_.data() + nd.a;
                const double* c = parts_.data() + nd.p;
                for (int t = 0; t < nd.b; ++t) adjs_[xs[t]] += g * c[t];
                break;
            }
        }
    }
}

}  // namespace fgdet::ad
