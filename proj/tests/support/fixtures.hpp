#pragma once

// Synthetic inputs shared by the unit and acceptance tests.

#include "faithfill/core/image.hpp"
#include "faithfill/dataset/dataset.hpp"
#include "faithfill/diffusion/denoiser.hpp"
#include "faithfill/diffusion/latent.hpp"
#include "faithfill/diffusion/toy_denoiser.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

namespace faithfill::testing {

using Rgb = std::array<double, 3>;

/// Uniform background with an axis-aligned square, plus an inner square of
/// a second colour so views carry texture.
ImageBuffer square_object(std::size_t size, std::size_t x0, std::size_t y0, std::size_t side,
                          Rgb background = {0.9, 0.9, 0.9}, Rgb object = {0.8, 0.15, 0.1},
                          Rgb detail = {0.1, 0.2, 0.7});

/// Pixels drawn uniformly from [0, 1).
ImageBuffer random_image(std::size_t height, std::size_t width, std::uint64_t seed);

/// Mask with the [x0, x1) x [y0, y1) box set to fill.
BinaryMask box_mask(std::size_t height, std::size_t width, std::size_t x0, std::size_t y0, std::size_t x1,
                    std::size_t y1);

/// Reference/target pair of one square object at `size` x `size`, target
/// shifted by a few pixels, with its mask over the object's right half.
dataset::PairRecord synthetic_pair(std::size_t size, std::string object_id = "square");

/// Writes a faithfill_pairs dataset of `count` synthetic objects under root.
dataset::DatasetManifest write_synthetic_dataset(const std::filesystem::path& root, std::size_t count,
                                                 std::size_t size = 32);

/// Small toy denoiser configuration used for fast tests.
diffusion::ToyDenoiserConfig small_toy_config();

/// Returns (z_t - sqrt(alpha) z0) / sqrt(1 - alpha), i.e. the exact noise
/// that produced z_t from a known clean latent.
class OracleDenoiser final : public diffusion::DenoiserBackend {
public:
    explicit OracleDenoiser(diffusion::LatentTensor z0) : z0_(std::move(z0)) {}

    std::string name() const override { return "oracle"; }
    std::string descriptor() const override { return "oracle"; }
    const diffusion::LatentCodec& codec() const override { return codec_; }
    std::size_t condition_width() const override { return 1; }
    diffusion::PromptEmbedding encode_prompt(std::string_view prompt) const override;
    diffusion::LatentTensor predict_noise(const diffusion::DenoiserInput& input) const override;
    void accumulate_lora_gradients(const diffusion::DenoiserInput&, const diffusion::LatentTensor&,
                                   diffusion::LoraGradients&) const override {}
    diffusion::LoraWeights& lora() override { return lora_; }
    const diffusion::LoraWeights& lora() const override { return lora_; }
    std::vector<double> frozen_parameters() const override { return {}; }

private:
    diffusion::LatentTensor z0_;
    diffusion::ToyAutoencoder codec_{8};
    diffusion::LoraWeights lora_;
};

/// Returns the noise drawn by gaussian_latent(seed), whatever the input.
class SeededNoiseDenoiser final : public diffusion::DenoiserBackend {
public:
    explicit SeededNoiseDenoiser(std::uint64_t seed, std::size_t factor = 8) : seed_(seed), codec_(factor) {}

    std::string name() const override { return "seeded-noise"; }
    std::string descriptor() const override { return "seeded-noise"; }
    const diffusion::LatentCodec& codec() const override { return codec_; }
    std::size_t condition_width() const override { return 1; }
    diffusion::PromptEmbedding encode_prompt(std::string_view prompt) const override;
    diffusion::LatentTensor predict_noise(const diffusion::DenoiserInput& input) const override;
    void accumulate_lora_gradients(const diffusion::DenoiserInput&, const diffusion::LatentTensor&,
                                   diffusion::LoraGradients&) const override {}
    diffusion::LoraWeights& lora() override { return lora_; }
    const diffusion::LoraWeights& lora() const override { return lora_; }
    std::vector<double> frozen_parameters() const override { return {}; }

private:
    std::uint64_t seed_;
    diffusion::ToyAutoencoder codec_;
    diffusion::LoraWeights lora_;
};

}  // namespace faithfill::testing

namespace faithfill::testing {

/// Expected rendering of the FaithFill-dataset reference row.
inline constexpr const char* kReferenceRowTable =
    "Dataset           | Methodology      | SSIM ↑  PSNR ↑  LPIPS ↓ | DreamSIM ↓ | DINO ↑  CLIP ↑\n"
    "                  |                  | low                     | mid        | high\n"
    "------------------+------------------+-------------------------+------------+---------------\n"
    "FaithFill Dataset | FaithFill (Ours) | 0.66    20.15   0.25    | 0.11       | 0.95    0.97\n";

}  // namespace faithfill::testing
