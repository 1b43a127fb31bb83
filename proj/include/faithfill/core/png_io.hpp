#pragma once

#include "faithfill/core/image.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>
#include <string_view>

namespace faithfill {

/// PNG text key carrying the mask convention; masks written by this toolkit
/// always record kMaskConventionFill.
inline constexpr std::string_view kMaskConventionKey = "faithfill.mask-convention";
inline constexpr std::string_view kMaskConventionFill = "255=fill,0=skip";

/// Loads any 8/16-bit PNG as RGB in [0, 1] (gray is expanded, alpha dropped).
ImageBuffer load_png(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG; values are clamped to [0, 1] and rounded.
void save_png(const std::filesystem::path& path, const ImageBuffer& image);

/// Loads a mask PNG; intensity >= 128 means fill. A convention text chunk with
/// any value other than kMaskConventionFill is rejected with ValidationError.
BinaryMask load_mask_png(const std::filesystem::path& path);

/// Writes a single-channel 8-bit PNG (255 = fill) tagged with the convention.
void save_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

/// Loads a PNG as a single gray plane in [0, 1] (alpha mattes, soft masks).
std::vector<double> load_gray_png(const std::filesystem::path& path, std::size_t& height, std::size_t& width);

/// Writes a single gray plane in [0, 1] as an 8-bit PNG.
void save_gray_png(const std::filesystem::path& path, std::span<const double> values, std::size_t height,
                   std::size_t width);

struct PngInfo {
    std::size_t height = 0;
    std::size_t width = 0;
    std::optional<std::string> mask_convention;  // value of the kMaskConventionKey chunk
};

/// Reads the header and the mask-convention chunk, no pixel data.
PngInfo read_png_info(const std::filesystem::path& path);

}  // namespace faithfill
