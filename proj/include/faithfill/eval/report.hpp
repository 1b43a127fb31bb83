#pragma once

#include "faithfill/dataset/dataset.hpp"
#include "faithfill/eval/embedders.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace faithfill::eval {

/// Metric groups as laid out in the results table.
enum class MetricLevel { low, mid, high };

/// One row of metric values. Feature metrics are absent when their embedder
/// was not configured.
struct MetricValues {
    double ssim = 0.0;                // low,  higher is better
    double psnr = 0.0;                // low,  dB, higher is better, may be +inf
    std::optional<double> lpips;      // low,  lower is better
    std::optional<double> dreamsim;   // mid,  lower is better
    std::optional<double> dino;       // high, higher is better
    std::optional<double> clip;       // high, higher is better
};

struct PairMetrics {
    std::string object_id;
    MetricValues values;
};

struct MetricReport {
    dataset::DatasetKind kind = dataset::DatasetKind::faithfill_pairs;
    bool mask_only = false;
    std::vector<PairMetrics> pairs;
    std::vector<std::string> missing;  // object ids without a generated image
    MetricValues means;                // arithmetic over `pairs`
};

struct EvalOptions {
    std::uint64_t seed = 0;          // picks dreambooth_pairs targets, as in finetune
    Resolution resolution{512, 512}; // every pair is compared at this size
    bool mask_only = false;          // crop to the target mask's bounding box; PSNR over mask pixels
};

/// Metrics of one generated/target pair.
MetricValues evaluate_pair(const ImageBuffer& generated, const ImageBuffer& target, const BinaryMask& mask,
                           EmbedderSet& embedders, const EvalOptions& options);

/// Reads `<results_dir>/<object_id>.png` for every manifest entry. Missing
/// generations are listed in the report and left out of the means.
MetricReport evaluate_dataset(const std::filesystem::path& results_dir, const dataset::DatasetManifest& manifest,
                              EmbedderSet& embedders, const EvalOptions& options);

/// Arithmetic means of the present values; an absent value in any pair
/// leaves that mean absent.
MetricValues mean_values(const std::vector<PairMetrics>& pairs);

/// PSNR +inf is written as the string "inf".
nlohmann::json to_json(const MetricReport& report);

struct TableRow {
    std::string dataset;
    std::string methodology;
    MetricValues values;
};

/// Text rendering of the results table: Dataset | Methodology | SSIM ↑
/// PSNR ↑ LPIPS ↓ | DreamSIM ↓ | DINO ↑ CLIP ↑, two decimals, with a
/// low/mid/high group line. Rows of the same dataset are grouped under one
/// label.
std::string render_table(const std::vector<TableRow>& rows);

std::string dataset_label(dataset::DatasetKind kind);

}  // namespace faithfill::eval
