#include "faithfill/diffusion/objectives.hpp"

#include "faithfill/core/error.hpp"
#include "faithfill/core/rng.hpp"
#include "faithfill/simd/kernels.hpp"

#include <cmath>
#include <string>

namespace faithfill::diffusion {

LatentTensor mix_noise(const LatentTensor& z0, const LatentTensor& eps, double alpha) {
    require_same_shape(z0, eps, "add_noise");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("add_noise: alpha outside [0, 1]");
    require_finite(z0, "add_noise z0");
    require_finite(eps, "add_noise eps");
    LatentTensor out(z0.channels(), z0.height(), z0.width());
    simd::axpby(std::sqrt(alpha), z0.data(), std::sqrt(1.0 - alpha), eps.data(), out.data());
    return out;
}

LatentTensor add_noise(const LatentTensor& z0, std::size_t t, const LatentTensor& eps, const NoiseSchedule& schedule) {
    require_same_shape(z0, eps, "add_noise");
    if (t < 1 || t > schedule.steps()) {
        throw ValidationError("add_noise: timestep " + std::to_string(t) + " outside [1, " +
                              std::to_string(schedule.steps()) + "]");
    }
    return mix_noise(z0, eps, schedule.alpha(t));
}

double text_loss(const LatentTensor& pred_eps, const LatentTensor& eps) {
    require_same_shape(pred_eps, eps, "text_loss");
    return simd::sum_squared_diff(pred_eps.data(), eps.data()) / static_cast<double>(eps.size());
}

LatentTensor text_loss_grad(const LatentTensor& pred_eps, const LatentTensor& eps) {
    require_same_shape(pred_eps, eps, "text_loss_grad");
    const double k = 2.0 / static_cast<double>(eps.size());
    LatentTensor grad(eps.channels(), eps.height(), eps.width());
    simd::axpby(k, pred_eps.data(), -k, eps.data(), grad.data());
    return grad;
}

LatentTensor gaussian_latent(std::size_t channels, std::size_t height, std::size_t width, std::uint64_t seed) {
    LatentTensor out(channels, height, width);
    Rng rng(seed);
    for (double& v : out.data()) v = rng.normal();
    return out;
}

namespace {

std::size_t checked_timestep(std::size_t t, const NoiseSchedule& schedule) {
    if (t < 1 || t > schedule.steps()) {
        throw ValidationError("timestep " + std::to_string(t) + " outside [1, " + std::to_string(schedule.steps()) + "]");
    }
    return t;
}

}  // namespace

LossResult inpaint_loss(const ImageBuffer& view, const BinaryMask& mask, std::size_t t,
                        const PromptEmbedding& condition, const DenoiserBackend& denoiser,
                        const NoiseSchedule& schedule, std::uint64_t rng_seed, bool with_gradients) {
    if (mask.resolution() != view.resolution()) {
        throw ValidationError("inpaint_loss: mask " + std::to_string(mask.height()) + "x" + std::to_string(mask.width()) +
                              " does not match view " + std::to_string(view.height()) + "x" +
                              std::to_string(view.width()));
    }
    checked_timestep(t, schedule);
    const LatentCodec& codec = denoiser.codec();

    const LatentTensor z0 = codec.encode(view);
    const LatentTensor masked_latent = codec.encode(apply_inverted_mask(view, mask));
    const std::vector<double> latent_mask = downsample_mask(mask, codec.factor());
    const LatentTensor eps = gaussian_latent(z0.channels(), z0.height(), z0.width(), rng_seed);
    const LatentTensor noisy = add_noise(z0, t, eps, schedule);

    const DenoiserInput input{noisy, t, schedule.alpha(t), condition, masked_latent, latent_mask};
    const LatentTensor pred = denoiser.predict_noise(input);
    require_finite(pred, "denoiser output");

    LossResult result{text_loss(pred, eps), std::nullopt};
    if (with_gradients) {
        result.gradients = LoraGradients::zeros_like(denoiser.lora());
        denoiser.accumulate_lora_gradients(input, text_loss_grad(pred, eps), *result.gradients);
    }
    return result;
}

double text_to_image_loss(const ImageBuffer& view, std::size_t t, const PromptEmbedding& condition,
                          const DenoiserBackend& denoiser, const NoiseSchedule& schedule, std::uint64_t rng_seed) {
    checked_timestep(t, schedule);
    const LatentCodec& codec = denoiser.codec();
    const LatentTensor z0 = codec.encode(view);
    const std::vector<double> no_mask(z0.pixels(), 0.0);
    const LatentTensor eps = gaussian_latent(z0.channels(), z0.height(), z0.width(), rng_seed);
    const LatentTensor noisy = add_noise(z0, t, eps, schedule);
    const LatentTensor pred =
        denoiser.predict_noise({noisy, t, schedule.alpha(t), condition, z0, no_mask});
    return text_loss(pred, eps);
}

}  // namespace faithfill::diffusion
