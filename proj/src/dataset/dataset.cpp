#include "faithfill/dataset/dataset.hpp"

#include "faithfill/core/png_io.hpp"
#include "faithfill/core/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

namespace faithfill::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view kind_name(DatasetKind kind) {
    return kind == DatasetKind::dreambooth_pairs ? "dreambooth_pairs" : "faithfill_pairs";
}

DatasetKind parse_kind(std::string_view name) {
    if (name == "dreambooth_pairs") return DatasetKind::dreambooth_pairs;
    if (name == "faithfill_pairs") return DatasetKind::faithfill_pairs;
    throw ValidationError("unknown dataset kind '" + std::string(name) + "'");
}

const EntryDescriptor* DatasetManifest::find(std::string_view object_id) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), object_id,
                                     [](const EntryDescriptor& e, std::string_view id) { return e.object_id < id; });
    return it != entries.end() && it->object_id == object_id ? &*it : nullptr;
}

namespace {

std::string join_failures(const std::vector<std::string>& failures) {
    std::string text = "manifest validation failed";
    for (const auto& f : failures) text += "\n  " + f;
    return text;
}

std::string shape(Resolution r) { return std::to_string(r.height) + "x" + std::to_string(r.width); }

std::vector<ImageEntry> parse_images(const json& entry, DatasetKind kind, const fs::path& dir) {
    std::vector<ImageEntry> images;
    if (kind == DatasetKind::faithfill_pairs) {
        images.push_back({dir / entry.value("reference", std::string("reference.png")), {}});
        images.push_back({dir / entry.value("target", std::string("target.png")),
                          dir / entry.value("target_mask", std::string("target_mask.png"))});
        return images;
    }
    if (!entry.contains("images") || !entry["images"].is_array()) {
        throw ValidationError("missing 'images' list");
    }
    for (const auto& item : entry["images"]) {
        ImageEntry image{dir / item.at("image").get<std::string>(), {}};
        if (item.contains("mask")) image.mask = dir / item["mask"].get<std::string>();
        images.push_back(std::move(image));
    }
    return images;
}

void validate_entry(const EntryDescriptor& entry, std::vector<std::string>& failures) {
    const std::string where = "entry '" + entry.object_id + "': ";
    for (const auto& image : entry.images) {
        if (!fs::exists(image.image)) {
            failures.push_back(where + "missing file " + image.image.string());
            continue;
        }
        std::optional<Resolution> image_shape;
        try {
            image_shape = load_png(image.image).resolution();
        } catch (const ValidationError& e) {
            failures.push_back(where + e.what());
        }
        if (image.mask.empty()) continue;
        if (!fs::exists(image.mask)) {
            failures.push_back(where + "missing file " + image.mask.string());
            continue;
        }
        try {
            const auto mask_shape = load_mask_png(image.mask).resolution();
            if (image_shape && mask_shape != *image_shape) {
                failures.push_back(where + "mask " + image.mask.filename().string() + " is " + shape(mask_shape) +
                                   " but image " + image.image.filename().string() + " is " +
                                   shape(*image_shape));
            }
        } catch (const ValidationError& e) {
            failures.push_back(where + e.what());
        }
    }
}

std::uint64_t hash_id(std::string_view id) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : id) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

ManifestError::ManifestError(std::vector<std::string> failures)
    : ValidationError(join_failures(failures)), failures_(std::move(failures)) {}

std::string make_prompt(std::string_view prompt_template, std::string_view object_class) {
    std::string prompt(prompt_template);
    constexpr std::string_view placeholder = "<object_class>";
    for (auto pos = prompt.find(placeholder); pos != std::string::npos;
         pos = prompt.find(placeholder, pos + object_class.size())) {
        prompt.replace(pos, placeholder.size(), object_class);
    }
    return prompt;
}

DatasetManifest load_manifest(const fs::path& root_path) {
    if (!fs::is_directory(root_path)) throw ManifestError({"not a directory: " + root_path.string()});
    const fs::path manifest_path = root_path / kManifestFile;
    if (!fs::exists(manifest_path)) {
        const bool empty = fs::directory_iterator(root_path) == fs::directory_iterator();
        throw ManifestError({empty ? std::string("no entries found") : "missing " + manifest_path.string()});
    }

    json doc;
    try {
        std::ifstream in(manifest_path);
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ManifestError({"cannot parse " + manifest_path.string() + ": " + e.what()});
    }

    DatasetManifest manifest;
    manifest.root_path = root_path;
    std::vector<std::string> failures;
    try {
        if (doc.value("version", 0) != 1) failures.push_back("unsupported manifest version");
        manifest.kind = parse_kind(doc.at("kind").get<std::string>());
    } catch (const std::exception& e) {
        throw ManifestError({std::string("bad manifest header: ") + e.what()});
    }

    std::set<std::string> seen;
    const json entries = doc.value("entries", json::array());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const json& raw = entries[i];
        EntryDescriptor entry;
        try {
            entry.object_id = raw.at("object_id").get<std::string>();
            entry.object_class = raw.at("object_class").get<std::string>();
            if (raw.contains("prompt")) entry.prompt = raw["prompt"].get<std::string>();
            entry.images = parse_images(raw, manifest.kind, root_path / entry.object_id);
        } catch (const std::exception& e) {
            failures.push_back("entry #" + std::to_string(i) + ": " + e.what());
            continue;
        }
        if (!seen.insert(entry.object_id).second) {
            failures.push_back("entry '" + entry.object_id + "': duplicate object_id");
            continue;
        }
        validate_entry(entry, failures);
        manifest.entries.push_back(std::move(entry));
    }
    if (entries.empty() && failures.empty()) failures.emplace_back("no entries found");
    if (!failures.empty()) throw ManifestError(std::move(failures));

    std::sort(manifest.entries.begin(), manifest.entries.end(),
              [](const auto& a, const auto& b) { return a.object_id < b.object_id; });
    return manifest;
}

void save_manifest(const DatasetManifest& manifest) {
    json doc{{"version", 1}, {"kind", kind_name(manifest.kind)}, {"entries", json::array()}};
    for (const auto& entry : manifest.entries) {
        const fs::path dir = manifest.root_path / entry.object_id;
        json raw{{"object_id", entry.object_id}, {"object_class", entry.object_class}};
        if (entry.prompt) raw["prompt"] = *entry.prompt;
        if (manifest.kind == DatasetKind::faithfill_pairs) {
            raw["reference"] = entry.images.at(0).image.lexically_relative(dir).string();
            raw["target"] = entry.images.at(1).image.lexically_relative(dir).string();
            raw["target_mask"] = entry.images.at(1).mask.lexically_relative(dir).string();
        } else {
            raw["images"] = json::array();
            for (const auto& image : entry.images) {
                json item{{"image", image.image.lexically_relative(dir).string()}};
                if (!image.mask.empty()) item["mask"] = image.mask.lexically_relative(dir).string();
                raw["images"].push_back(item);
            }
        }
        doc["entries"].push_back(raw);
    }
    fs::create_directories(manifest.root_path);
    std::ofstream out(manifest.root_path / kManifestFile);
    out << doc.dump(2) << '\n';
    if (!out) throw RuntimeFailure("cannot write manifest in " + manifest.root_path.string());
}

PairRecord sample_pair(const DatasetManifest& manifest, std::string_view object_id, std::uint64_t seed,
                       std::string_view prompt_template) {
    const EntryDescriptor* entry = manifest.find(object_id);
    if (!entry) throw ValidationError("unknown object_id '" + std::string(object_id) + "'");

    std::size_t reference_index = 0;
    std::size_t target_index = 1;
    if (manifest.kind == DatasetKind::dreambooth_pairs) {
        const std::size_t n = entry->images.size();
        if (n < 2) {
            throw ValidationError("object '" + entry->object_id + "' has a single image; dreambooth_pairs needs two");
        }
        Rng rng(derive_seed(seed, hash_id(entry->object_id)));
        reference_index = rng.uniform_int(0, n - 1);
        target_index = rng.uniform_int(0, n - 2);
        if (target_index >= reference_index) ++target_index;
    }
    const ImageEntry& reference = entry->images.at(reference_index);
    const ImageEntry& target = entry->images.at(target_index);
    if (target.mask.empty()) {
        throw ValidationError("object '" + entry->object_id + "': image " + target.image.filename().string() +
                              " has no mask and cannot be a target");
    }

    PairRecord pair{entry->object_id,
                    entry->object_class,
                    load_png(reference.image),
                    load_png(target.image),
                    load_mask_png(target.mask),
                    entry->prompt ? *entry->prompt : make_prompt(prompt_template, entry->object_class),
                    reference.image,
                    target.image};
    if (pair.target_mask.resolution() != pair.target.resolution()) {
        throw ValidationError("object '" + entry->object_id + "': mask " + shape(pair.target_mask.resolution()) +
                              " does not match target " + shape(pair.target.resolution()));
    }
    return pair;
}

PairRecord to_working_resolution(PairRecord pair, Resolution resolution) {
    pair.reference = resize_bilinear(pair.reference, resolution);
    pair.target = resize_bilinear(pair.target, resolution);
    pair.target_mask = resize_nearest(pair.target_mask, resolution);
    return pair;
}

}  // namespace faithfill::dataset
