#pragma once

#include "faithfill/diffusion/lora.hpp"

#include <vector>

namespace faithfill::diffusion {

/// Momentum-free RMSProp over LoRA parameters:
///   v <- decay v + (1 - decay) g^2;  p <- p - lr g / (sqrt(v) + eps).
class RmsProp {
public:
    struct Options {
        double learning_rate = 5e-4;
        double decay = 0.99;
        double epsilon = 1e-8;
    };

    explicit RmsProp(Options options) : options_(options) {}

    void step(LoraWeights& weights, const LoraGradients& grads);
    std::size_t steps_taken() const { return steps_; }

private:
    Options options_;
    LoraGradients square_avg_;
    std::size_t steps_ = 0;
};

}  // namespace faithfill::diffusion
