#include "faithfill/diffusion/sampler.hpp"

#include "faithfill/core/error.hpp"
#include "faithfill/core/rng.hpp"
#include "faithfill/simd/kernels.hpp"

#include <cmath>
#include <optional>

namespace faithfill::diffusion {

std::vector<std::size_t> sampling_timesteps(std::size_t T, std::size_t steps) {
    if (steps < 1) throw ValidationError("sampler needs steps >= 1");
    if (T < 1) throw ValidationError("sampler needs T >= 1");
    std::vector<std::size_t> out;
    if (steps == 1) return {T};
    const std::size_t n = std::min(steps, T);
    for (std::size_t k = n; k-- > 0;) {
        // Rounded even spacing from 1 to T; the first element is T, the last 1.
        const std::size_t t = 1 + (k * (T - 1) + (n - 1) / 2) / (n - 1);
        if (out.empty() || out.back() != t) out.push_back(t);
    }
    return out;
}

namespace {

LatentTensor run_sampler(const LatentTensor& z_T, const std::optional<PromptEmbedding>& condition,
                         const PromptEmbedding& unconditional, const MaskInputs& mask_inputs,
                         const DenoiserBackend& denoiser, const NoiseSchedule& schedule,
                         const SamplerOptions& options) {
    if (!(options.guidance_scale >= 0.0)) throw ValidationError("guidance_scale must be >= 0");
    require_finite(z_T, "sampler input");
    require_same_shape(z_T, mask_inputs.masked_latent, "sampler mask inputs");

    const auto timesteps = sampling_timesteps(schedule.steps(), options.steps);
    Rng rng(options.seed);
    LatentTensor z = z_T;
    LatentTensor x0(z.channels(), z.height(), z.width());
    LatentTensor guided(z.channels(), z.height(), z.width());
    for (std::size_t i = 0; i < timesteps.size(); ++i) {
        const std::size_t t = timesteps[i];
        const std::size_t t_prev = i + 1 < timesteps.size() ? timesteps[i + 1] : 0;
        const double alpha = schedule.alpha(t);
        const double alpha_prev = schedule.alpha(t_prev);

        const LatentTensor uncond =
            denoiser.predict_noise({z, t, alpha, unconditional, mask_inputs.masked_latent, mask_inputs.mask});
        if (condition) {
            const LatentTensor cond =
                denoiser.predict_noise({z, t, alpha, *condition, mask_inputs.masked_latent, mask_inputs.mask});
            LatentTensor diff(z.channels(), z.height(), z.width());
            simd::axpby(1.0, cond.data(), -1.0, uncond.data(), diff.data());
            simd::axpby(1.0, uncond.data(), options.guidance_scale, diff.data(), guided.data());
        } else {
            guided = uncond;
        }
        require_finite(guided, "denoiser output");

        const double inv_signal = 1.0 / std::sqrt(alpha);
        simd::axpby(inv_signal, z.data(), -std::sqrt(1.0 - alpha) * inv_signal, guided.data(), x0.data());
        if (t_prev == 0) {
            z = x0;
            break;
        }
        // Posterior q(z_prev | z_t, x0) of the strided chain.
        const double beta = 1.0 - alpha / alpha_prev;
        const double coeff_x0 = std::sqrt(alpha_prev) * beta / (1.0 - alpha);
        const double coeff_z = std::sqrt(1.0 - beta) * (1.0 - alpha_prev) / (1.0 - alpha);
        const double sigma = std::sqrt(beta * (1.0 - alpha_prev) / (1.0 - alpha));
        LatentTensor next(z.channels(), z.height(), z.width());
        simd::axpby(coeff_x0, x0.data(), coeff_z, z.data(), next.data());
        LatentTensor noise(z.channels(), z.height(), z.width());
        for (double& v : noise.data()) v = rng.normal();
        simd::axpy(sigma, noise.data(), next.data());
        z = std::move(next);
    }
    return z;
}

}  // namespace

LatentTensor sample(const LatentTensor& z_T, const PromptEmbedding& condition, const MaskInputs& mask_inputs,
                    const DenoiserBackend& denoiser, const NoiseSchedule& schedule, const SamplerOptions& options) {
    return run_sampler(z_T, condition, denoiser.encode_prompt(""), mask_inputs, denoiser, schedule, options);
}

LatentTensor sample_unconditional(const LatentTensor& z_T, const MaskInputs& mask_inputs,
                                  const DenoiserBackend& denoiser, const NoiseSchedule& schedule,
                                  const SamplerOptions& options) {
    return run_sampler(z_T, std::nullopt, denoiser.encode_prompt(""), mask_inputs, denoiser, schedule, options);
}

}  // namespace faithfill::diffusion
