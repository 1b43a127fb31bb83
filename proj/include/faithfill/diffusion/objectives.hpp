#pragma once

#include "faithfill/core/image.hpp"
#include "faithfill/diffusion/denoiser.hpp"
#include "faithfill/diffusion/latent.hpp"
#include "faithfill/diffusion/schedule.hpp"

#include <cstdint>
#include <optional>

namespace faithfill::diffusion {

/// sqrt(alpha) z0 + sqrt(1 - alpha) eps for any alpha in [0, 1].
LatentTensor mix_noise(const LatentTensor& z0, const LatentTensor& eps, double alpha);

/// mix_noise at the schedule's alpha_t, t in [1, T].
LatentTensor add_noise(const LatentTensor& z0, std::size_t t, const LatentTensor& eps,
                       const NoiseSchedule& schedule);

/// Mean over elements of (pred - eps)^2.
double text_loss(const LatentTensor& pred_eps, const LatentTensor& eps);

/// d(text_loss)/d(pred_eps) = 2 (pred - eps) / N.
LatentTensor text_loss_grad(const LatentTensor& pred_eps, const LatentTensor& eps);

/// Standard normal tensor drawn from Rng(seed) in storage order.
LatentTensor gaussian_latent(std::size_t channels, std::size_t height, std::size_t width, std::uint64_t seed);

struct LossResult {
    double loss = 0.0;
    std::optional<LoraGradients> gradients;
};

/// Masked finetuning loss: the view's fill region (mask == 1) is zeroed,
/// the clean view is noised at t with eps ~ N(0, I) from rng_seed, and the
/// denoiser's prediction from (z_t, masked latent, mask, t, condition) is
/// scored against eps. Gradients, when requested, cover LoRA parameters only.
LossResult inpaint_loss(const ImageBuffer& view, const BinaryMask& mask, std::size_t t,
                        const PromptEmbedding& condition, const DenoiserBackend& denoiser,
                        const NoiseSchedule& schedule, std::uint64_t rng_seed, bool with_gradients = false);

/// Unmasked text-to-image loss on the same draw: the denoiser sees the clean
/// latent as context and an all-zero mask.
double text_to_image_loss(const ImageBuffer& view, std::size_t t, const PromptEmbedding& condition,
                          const DenoiserBackend& denoiser, const NoiseSchedule& schedule, std::uint64_t rng_seed);

}  // namespace faithfill::diffusion
