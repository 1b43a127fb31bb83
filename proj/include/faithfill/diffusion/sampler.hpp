#pragma once

#include "faithfill/diffusion/denoiser.hpp"
#include "faithfill/diffusion/latent.hpp"
#include "faithfill/diffusion/schedule.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace faithfill::diffusion {

struct SamplerOptions {
    double guidance_scale = 7.5;
    std::size_t steps = 50;
    std::uint64_t seed = 0;
};

/// Inpainting context held fixed during sampling.
struct MaskInputs {
    const LatentTensor& masked_latent;
    std::span<const double> mask;
};

/// Evenly spaced timesteps in [1, T], descending; steps = 1 gives {T}.
std::vector<std::size_t> sampling_timesteps(std::size_t T, std::size_t steps);

/// Ancestral DDPM sampling over a strided timestep subsequence. Each step
/// forms x0 = (z - sqrt(1 - a_t) eps) / sqrt(a_t) from the guided prediction
///   eps = eps_uncond + guidance_scale * (eps_cond - eps_uncond)
/// and draws from the posterior q(z_prev | z_t, x0); the last step returns x0.
LatentTensor sample(const LatentTensor& z_T, const PromptEmbedding& condition, const MaskInputs& mask_inputs,
                    const DenoiserBackend& denoiser, const NoiseSchedule& schedule, const SamplerOptions& options);

/// Same loop driven by the unconditional prediction alone.
LatentTensor sample_unconditional(const LatentTensor& z_T, const MaskInputs& mask_inputs,
                                  const DenoiserBackend& denoiser, const NoiseSchedule& schedule,
                                  const SamplerOptions& options);

}  // namespace faithfill::diffusion
