#include "support/fixtures.hpp"

#include "faithfill/core/png_io.hpp"
#include "faithfill/core/rng.hpp"
#include "faithfill/diffusion/objectives.hpp"

#include <cmath>

namespace faithfill::testing {

ImageBuffer square_object(std::size_t size, std::size_t x0, std::size_t y0, std::size_t side, Rgb background,
                          Rgb object, Rgb detail) {
    ImageBuffer image(size, size);
    const std::size_t inner0 = side / 4;
    const std::size_t inner1 = side / 2;
    for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
            Rgb colour = background;
            if (x >= x0 && x < x0 + side && y >= y0 && y < y0 + side) {
                const std::size_t lx = x - x0;
                const std::size_t ly = y - y0;
                colour = (lx >= inner0 && lx < inner1 && ly >= inner0 && ly < inner1) ? detail : object;
            }
            for (std::size_t c = 0; c < 3; ++c) image.at(y, x, c) = colour[c];
        }
    }
    return image;
}

ImageBuffer random_image(std::size_t height, std::size_t width, std::uint64_t seed) {
    ImageBuffer image(height, width);
    Rng rng(seed);
    for (double& v : image.data()) v = rng.uniform();
    return image;
}

BinaryMask box_mask(std::size_t height, std::size_t width, std::size_t x0, std::size_t y0, std::size_t x1,
                    std::size_t y1) {
    BinaryMask mask(height, width);
    for (std::size_t y = y0; y < y1; ++y)
        for (std::size_t x = x0; x < x1; ++x) mask.set(y, x, true);
    return mask;
}

dataset::PairRecord synthetic_pair(std::size_t size, std::string object_id) {
    const std::size_t side = size / 2;
    const std::size_t origin = size / 4;
    const std::size_t shift = std::max<std::size_t>(1, size / 16);
    dataset::PairRecord pair{object_id,
                             "square",
                             square_object(size, origin, origin, side),
                             square_object(size, origin + shift, origin, side),
                             box_mask(size, size, origin + shift + side / 2, origin, origin + shift + side,
                                      origin + side),
                             dataset::make_prompt(dataset::kDefaultPromptTemplate, "square"),
                             {},
                             {}};
    return pair;
}

dataset::DatasetManifest write_synthetic_dataset(const std::filesystem::path& root, std::size_t count,
                                                 std::size_t size) {
    dataset::DatasetManifest manifest;
    manifest.root_path = root;
    manifest.kind = dataset::DatasetKind::faithfill_pairs;
    for (std::size_t i = 0; i < count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "object_%02zu", i);
        const auto dir = root / id;
        std::filesystem::create_directories(dir);
        const auto pair = synthetic_pair(size, id);
        save_png(dir / "reference.png", pair.reference);
        save_png(dir / "target.png", pair.target);
        save_mask_png(dir / "target_mask.png", pair.target_mask);
        manifest.entries.push_back(
            {id, "square", std::nullopt, {{dir / "reference.png", {}}, {dir / "target.png", dir / "target_mask.png"}}});
    }
    dataset::save_manifest(manifest);
    return manifest;
}

diffusion::ToyDenoiserConfig small_toy_config() {
    diffusion::ToyDenoiserConfig config;
    config.hidden = 16;
    config.condition_width = 8;
    config.lora_rank = 4;
    config.text_lora_rank = 4;
    config.latent_factor = 8;
    return config;
}

diffusion::PromptEmbedding OracleDenoiser::encode_prompt(std::string_view prompt) const {
    return {std::string(prompt), {0.0}, {0.0}};
}

diffusion::LatentTensor OracleDenoiser::predict_noise(const diffusion::DenoiserInput& input) const {
    diffusion::LatentTensor out(input.noisy.channels(), input.noisy.height(), input.noisy.width());
    const double signal = std::sqrt(input.alpha);
    const double noise = std::sqrt(1.0 - input.alpha);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = (input.noisy.data()[i] - signal * z0_.data()[i]) / noise;
    }
    return out;
}

diffusion::PromptEmbedding SeededNoiseDenoiser::encode_prompt(std::string_view prompt) const {
    return {std::string(prompt), {0.0}, {0.0}};
}

diffusion::LatentTensor SeededNoiseDenoiser::predict_noise(const diffusion::DenoiserInput& input) const {
    return diffusion::gaussian_latent(input.noisy.channels(), input.noisy.height(), input.noisy.width(), seed_);
}

}  // namespace faithfill::testing
