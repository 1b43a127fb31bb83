#include "faithfill/diffusion/optimizer.hpp"

#include "faithfill/core/error.hpp"

#include <cmath>

namespace faithfill::diffusion {
namespace {

void update(std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& avg,
            const RmsProp::Options& o) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        avg[i] = o.decay * avg[i] + (1.0 - o.decay) * grad[i] * grad[i];
        param[i] -= o.learning_rate * grad[i] / (std::sqrt(avg[i]) + o.epsilon);
    }
}

}  // namespace

void RmsProp::step(LoraWeights& weights, const LoraGradients& grads) {
    if (grads.layers.size() != weights.layers.size()) throw ValidationError("gradient/weight layer count mismatch");
    if (square_avg_.layers.empty()) square_avg_ = LoraGradients::zeros_like(weights);
    for (std::size_t l = 0; l < weights.layers.size(); ++l) {
        auto& layer = weights.layers[l];
        const auto& g = grads.layers[l];
        if (g.a.size() != layer.a.size() || g.b.size() != layer.b.size()) {
            throw ValidationError("gradient shape mismatch for layer '" + layer.name + "'");
        }
        update(layer.a, g.a, square_avg_.layers[l].a, options_);
        update(layer.b, g.b, square_avg_.layers[l].b, options_);
    }
    ++steps_;
}

}  // namespace faithfill::diffusion
