#pragma once

#include "faithfill/core/error.hpp"
#include "faithfill/core/image.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace faithfill::dataset {

enum class DatasetKind { dreambooth_pairs, faithfill_pairs };

std::string_view kind_name(DatasetKind kind);
DatasetKind parse_kind(std::string_view name);

inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kDefaultPromptTemplate = "An image of <object_class>";

struct ImageEntry {
    std::filesystem::path image;
    std::filesystem::path mask;  // empty: image cannot serve as a target
};

/// One object's files, resolved to absolute paths. For faithfill_pairs the
/// images are exactly [reference, target]; for dreambooth_pairs any image
/// with a mask can be drawn as the target.
struct EntryDescriptor {
    std::string object_id;
    std::string object_class;
    std::optional<std::string> prompt;
    std::vector<ImageEntry> images;
};

struct DatasetManifest {
    std::filesystem::path root_path;
    DatasetKind kind = DatasetKind::faithfill_pairs;
    std::vector<EntryDescriptor> entries;  // sorted by object_id

    const EntryDescriptor* find(std::string_view object_id) const;
};

struct PairRecord {
    std::string object_id;
    std::string object_class;
    ImageBuffer reference;
    ImageBuffer target;
    BinaryMask target_mask;
    std::string prompt;
    std::filesystem::path reference_path;
    std::filesystem::path target_path;
};

/// Collects every validation failure found while loading a manifest.
class ManifestError : public ValidationError {
public:
    explicit ManifestError(std::vector<std::string> failures);
    const std::vector<std::string>& failures() const { return failures_; }

private:
    std::vector<std::string> failures_;
};

/// Replaces "<object_class>" in the template.
std::string make_prompt(std::string_view prompt_template, std::string_view object_class);

/// Parses `<root>/manifest.json` and validates every referenced file. Throws
/// ManifestError listing all failures.
DatasetManifest load_manifest(const std::filesystem::path& root_path);

/// Writes `<root>/manifest.json` for the given entries (paths stored relative
/// to `<root>/<object_id>/`).
void save_manifest(const DatasetManifest& manifest);

/// Deterministic in (manifest, object_id, seed). dreambooth_pairs draws an
/// ordered (reference, target) pair of distinct images; faithfill_pairs has
/// fixed roles and ignores the seed.
PairRecord sample_pair(const DatasetManifest& manifest, std::string_view object_id, std::uint64_t seed,
                       std::string_view prompt_template = kDefaultPromptTemplate);

/// Resizes images bilinearly and the mask nearest-neighbour.
PairRecord to_working_resolution(PairRecord pair, Resolution resolution);

}  // namespace faithfill::dataset
