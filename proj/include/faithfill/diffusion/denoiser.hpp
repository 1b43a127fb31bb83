#pragma once

#include "faithfill/diffusion/codec.hpp"
#include "faithfill/diffusion/latent.hpp"
#include "faithfill/diffusion/lora.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faithfill::diffusion {

/// Encoded prompt; an empty prompt is the unconditional embedding.
struct PromptEmbedding {
    std::string prompt_text;
    std::vector<double> token_features;  // pooled token embedding, before the text encoder
    std::vector<double> vector;          // text encoder output fed to the denoiser

    friend bool operator==(const PromptEmbedding&, const PromptEmbedding&) = default;
};

/// Everything the noise predictor sees for one sample.
struct DenoiserInput {
    const LatentTensor& noisy;          // z_t
    std::size_t timestep;               // t in [1, T]
    double alpha;                       // schedule value alpha_t
    const PromptEmbedding& condition;
    const LatentTensor& masked_latent;  // encode(x ⊙ (1 - m))
    std::span<const double> mask;       // latent-resolution mask, 1 = fill
};

/// Noise predictor with frozen base weights and trainable LoRA residuals.
class DenoiserBackend {
public:
    virtual ~DenoiserBackend() = default;

    virtual std::string name() const = 0;
    /// Identifies the frozen base (name + construction parameters).
    virtual std::string descriptor() const = 0;
    virtual const LatentCodec& codec() const = 0;
    virtual std::size_t condition_width() const = 0;

    virtual PromptEmbedding encode_prompt(std::string_view prompt) const = 0;

    /// Output has the shape of input.noisy.
    virtual LatentTensor predict_noise(const DenoiserInput& input) const = 0;

    /// Adds d(loss)/d(LoRA parameters) into `grads`, given d(loss)/d(output).
    /// Gradients for the text-encoder adapters flow through input.condition.
    virtual void accumulate_lora_gradients(const DenoiserInput& input, const LatentTensor& output_grad,
                                           LoraGradients& grads) const = 0;

    virtual LoraWeights& lora() = 0;
    virtual const LoraWeights& lora() const = 0;

    /// Flat copy of every frozen base parameter, for immutability checks.
    virtual std::vector<double> frozen_parameters() const = 0;
};

}  // namespace faithfill::diffusion
