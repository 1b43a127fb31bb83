#pragma once

#include "faithfill/core/image.hpp"
#include "faithfill/viewgen/viewgen.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace faithfill::maskgen {

struct MaskGenConfig {
    double ratio = 0.5;
    std::size_t max_rectangles = 8;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1), already clipped.
struct Rect {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t x1 = 0;
    std::size_t y1 = 0;
    bool deficit_fill = false;  // the final top-up rectangle

    std::size_t area() const { return (x1 - x0) * (y1 - y0); }
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct GeneratedMask {
    BinaryMask mask;
    std::vector<Rect> rectangles;
};

/// Random-rectangle training mask with coverage >= ratio.
///
/// An initial batch of uniform [1, max_rectangles] rectangles is drawn, each
/// with width uniform in {1..floor(width*ratio)} and height uniform in
/// {1..floor(height*ratio)} around a uniformly drawn centre, clipped to the
/// image. Further rectangles are added while coverage < ratio, up to
/// max_rectangles*10 attempts. If still short, one rectangle grown around the
/// centre of the least-covered quadrant closes the deficit.
GeneratedMask generate_mask_with_log(std::size_t height, std::size_t width, const MaskGenConfig& config);

BinaryMask generate_mask(std::size_t height, std::size_t width, const MaskGenConfig& config);

/// Union of the logged rectangles.
BinaryMask rasterize(std::size_t height, std::size_t width, const std::vector<Rect>& rectangles);

/// One mask per resolution; mask i uses seed config.seed + i.
std::vector<BinaryMask> mask_batch(const std::vector<Resolution>& view_sizes, const MaskGenConfig& config);
std::vector<BinaryMask> mask_batch(const viewgen::ViewSet& views, const MaskGenConfig& config);

/// Rectangle log as structured text (JSON array of {x0,y0,x1,y1,deficit_fill}).
std::string rectangles_to_json(const std::vector<Rect>& rectangles);
std::vector<Rect> rectangles_from_json(const std::string& text);

}  // namespace faithfill::maskgen
