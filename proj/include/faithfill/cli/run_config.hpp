#pragma once

#include "faithfill/diffusion/toy_denoiser.hpp"
#include "faithfill/pipeline/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace faithfill::cli {

/// Every tunable of a run in one flat record. Resolution order is
/// defaults < config file < command-line flags.
///
/// File format (version 1): one `key = value` per line, `#` starts a comment
/// line, surrounding whitespace is ignored, `version = 1` is mandatory and
/// unknown keys are rejected. `faithfill <subcommand> --help` lists the keys
/// as flags (underscores become dashes).
struct RunConfig {
    static constexpr int kVersion = 1;

    std::filesystem::path dataset_root = ".";
    std::string backend = "toy";             // denoiser: toy | full
    std::string segmenter = "toy-threshold"; // toy-threshold | sam
    std::string view_backend = "toy-affine"; // toy-affine | nerf
    std::string embedders = "stub";          // stub | full
    std::uint64_t seed = 0;
    std::optional<std::size_t> iterations;   // unset: per dataset kind
    double lr = 5e-4;
    std::size_t rank = 4;
    std::size_t text_rank = 4;
    double lora_scale = 1.0;
    double mask_ratio = 0.5;
    std::size_t max_rectangles = 8;
    std::size_t n_views = 6;
    std::string prompt_template{dataset::kDefaultPromptTemplate};
    std::size_t height = 512;
    std::size_t width = 512;
    double canvas_gray = 0.5;
    diffusion::ScheduleKind schedule = diffusion::ScheduleKind::linear;
    std::size_t timesteps = 1000;
    double guidance_scale = 7.5;
    std::size_t steps = 50;
    std::size_t toy_hidden = 32;
    std::size_t toy_condition_width = 8;
    std::size_t toy_latent_factor = 8;
    std::uint64_t toy_base_seed = 1234;
    bool toy_control_branch = false;
    std::size_t backend_timeout_s = 600;

    /// Sets one key from its text form; ValidationError on unknown keys or
    /// malformed values.
    void set(std::string_view key, std::string_view value);
    std::string get(std::string_view key) const;

    /// Applies a config file on top of the current values.
    void merge_file(const std::filesystem::path& path);
    void merge_text(std::string_view text, std::string_view source = "<text>");

    /// Full snapshot in file format, every key present.
    std::string to_text() const;
    void write_snapshot(const std::filesystem::path& path) const;

    /// Cross-field checks run once everything is merged.
    void validate() const;

    pipeline::FinetuneConfig finetune_config(dataset::DatasetKind kind) const;
    pipeline::InferenceConfig inference_config() const;
    diffusion::ToyDenoiserConfig toy_denoiser_config() const;
    Resolution resolution() const { return {height, width}; }
};

/// All keys, in snapshot order.
const std::vector<std::string>& config_keys();

}  // namespace faithfill::cli
