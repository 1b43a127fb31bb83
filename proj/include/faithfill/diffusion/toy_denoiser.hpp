#pragma once

#include "faithfill/diffusion/denoiser.hpp"

#include <cstdint>
#include <memory>

namespace faithfill::diffusion {

struct ToyDenoiserConfig {
    std::size_t hidden = 32;
    std::size_t condition_width = 8;
    std::size_t lora_rank = 4;       // U-Net adapters
    std::size_t text_lora_rank = 4;  // text-encoder adapter
    double lora_scale = 1.0;
    std::size_t latent_factor = 8;
    std::uint64_t base_seed = 1234;   // frozen base weights
    std::uint64_t lora_seed = 0;      // initial A matrices
    bool control_branch = false;      // frozen mask/context branch into the second layer
};

/// Per-latent-pixel MLP noise predictor.
///
/// Features per pixel: z_t (4), masked latent (4), mask (1),
/// sqrt(alpha_t), sqrt(1 - alpha_t). Two tanh layers of width `hidden`, the
/// first also receiving W_c * condition; a linear head yields 4 channels.
/// LoRA adapts the first two layers ("unet.in", "unet.mid") and the text
/// projection ("text.proj"). The prompt encoder is a hashed bag of words.
class ToyDenoiser final : public DenoiserBackend {
public:
    static constexpr std::size_t kLatentChannels = 4;
    static constexpr std::size_t kFeatures = 11;

    explicit ToyDenoiser(ToyDenoiserConfig config = {});

    std::string name() const override { return "toy"; }
    std::string descriptor() const override;
    const LatentCodec& codec() const override { return codec_; }
    std::size_t condition_width() const override { return config_.condition_width; }

    PromptEmbedding encode_prompt(std::string_view prompt) const override;
    LatentTensor predict_noise(const DenoiserInput& input) const override;
    void accumulate_lora_gradients(const DenoiserInput& input, const LatentTensor& output_grad,
                                   LoraGradients& grads) const override;

    LoraWeights& lora() override { return lora_; }
    const LoraWeights& lora() const override { return lora_; }
    std::vector<double> frozen_parameters() const override;

    const ToyDenoiserConfig& config() const { return config_; }

    /// Same base weights, LoRA B reset to zero (the un-finetuned model).
    void reset_lora();

private:
    struct Activations;
    Activations forward(const DenoiserInput& input) const;
    std::vector<double> condition_vector(std::span<const double> token_features) const;

    ToyDenoiserConfig config_;
    ToyAutoencoder codec_;
    // Frozen base, row-major (out x in).
    std::vector<double> w_in_, b_in_, w_cond_, w_mid_, b_mid_, w_out_, b_out_, w_text_, w_control_;
    LoraWeights lora_;
};

}  // namespace faithfill::diffusion
