#pragma once

#include "faithfill/core/image.hpp"
#include "faithfill/dataset/dataset.hpp"
#include "faithfill/diffusion/denoiser.hpp"
#include "faithfill/diffusion/lora.hpp"
#include "faithfill/diffusion/schedule.hpp"
#include "faithfill/viewgen/viewgen.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace faithfill::pipeline {

/// Finetuning knobs. Iterations default per dataset kind: 1100 for
/// dreambooth_pairs, 1500 for faithfill_pairs.
struct FinetuneConfig {
    std::size_t iterations = 1500;
    double learning_rate = 5e-4;
    std::size_t lora_rank = 4;
    std::size_t text_lora_rank = 4;
    double mask_ratio = 0.5;
    std::size_t max_rectangles = 8;
    std::size_t n_views = 6;
    std::uint64_t seed = 0;
    std::string prompt_template{dataset::kDefaultPromptTemplate};
    Resolution resolution{512, 512};
    double canvas_gray = 0.5;
    std::size_t schedule_steps = 1000;
    diffusion::ScheduleKind schedule_kind = diffusion::ScheduleKind::linear;

    void validate() const;
};

std::size_t default_iterations(dataset::DatasetKind kind);

nlohmann::json to_json(const FinetuneConfig& config);
FinetuneConfig finetune_config_from_json(const nlohmann::json& doc);

struct Backends {
    viewgen::SegmenterBackend& segmenter;
    viewgen::ViewBackend& views;
    diffusion::DenoiserBackend& denoiser;
};

struct IterationRecord {
    std::size_t view_index = 0;  // 0-based into the ViewSet
    std::size_t timestep = 0;
    std::uint64_t mask_seed = 0;
    std::uint64_t noise_seed = 0;
    double loss = 0.0;
};

struct RunRecord {
    static constexpr int kSchemaVersion = 1;

    FinetuneConfig config;
    std::string object_id;
    std::string prompt;
    diffusion::LoraWeights weights;
    std::vector<double> loss_trace;
    std::vector<IterationRecord> iterations;
    std::vector<viewgen::ViewProvenance> views;
    std::string segmenter;
    std::string view_backend;
    std::string denoiser;
    std::string rng_algorithm;
    bool reference_in_training = false;  // only the ViewSet is used
    double wall_clock_seconds = 0.0;
};

/// segment -> generate views -> per iteration {uniform view, fresh mask,
/// uniform t, inpaint loss, RMSProp step on LoRA}. The denoiser's LoRA
/// state is reset to its zero-residual initialisation first and holds the
/// final weights afterwards. Stage errors carry the stage name and iteration.
RunRecord finetune(const dataset::PairRecord& pair, const FinetuneConfig& config, Backends backends,
                   const viewgen::Hint& hint = {});

struct InferenceConfig {
    double guidance_scale = 7.5;
    std::size_t steps = 50;
    std::uint64_t seed = 0;
    Resolution resolution{512, 512};
    std::size_t schedule_steps = 1000;
    diffusion::ScheduleKind schedule_kind = diffusion::ScheduleKind::linear;
};

/// Fills the mask == 1 region of `target`; pixels where mask == 0 are copied
/// from `target` unchanged. Rejects weights whose schedule fingerprint or
/// base descriptor differ from the inference setup.
ImageBuffer inpaint(const ImageBuffer& target, const BinaryMask& mask, const diffusion::LoraWeights& weights,
                    std::string_view prompt, const InferenceConfig& config, diffusion::DenoiserBackend& denoiser);

/// Removing an occluder, or hallucinating a fully hidden object, is inpainting
/// with the mask drawn over the occluder.
inline ImageBuffer occlusion_edit(const ImageBuffer& target, const BinaryMask& occluder_mask,
                                  const diffusion::LoraWeights& weights, std::string_view prompt,
                                  const InferenceConfig& config, diffusion::DenoiserBackend& denoiser) {
    return inpaint(target, occluder_mask, weights, prompt, config, denoiser);
}

nlohmann::json to_json(const RunRecord& record);

/// Writes run_record.json and lora.bin into `dir`.
void save_run(const std::filesystem::path& dir, const RunRecord& record);

/// Reads run_record.json (weights from the sibling lora.bin).
RunRecord load_run(const std::filesystem::path& dir);

}  // namespace faithfill::pipeline
