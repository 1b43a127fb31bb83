#include "faithfill/maskgen/maskgen.hpp"

#include "faithfill/core/error.hpp"
#include "faithfill/core/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace faithfill::maskgen {

void MaskGenConfig::validate() const {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw ValidationError("mask ratio must lie in [0, 1]");
    if (max_rectangles < 1) throw ValidationError("max_rectangles must be >= 1");
}

namespace {

/// Running mask plus a fill counter.
class Canvas {
public:
    Canvas(std::size_t height, std::size_t width) : mask_(height, width) {}

    void paint(const Rect& r) {
        for (std::size_t y = r.y0; y < r.y1; ++y) {
            for (std::size_t x = r.x0; x < r.x1; ++x) {
                if (!mask_.at(y, x)) {
                    mask_.set(y, x, true);
                    ++filled_;
                }
            }
        }
    }

    bool reached(double ratio) const {
        return static_cast<double>(filled_) / static_cast<double>(mask_.pixel_count()) >= ratio;
    }

    std::size_t filled() const { return filled_; }
    const BinaryMask& mask() const { return mask_; }
    BinaryMask release() { return std::move(mask_); }

private:
    BinaryMask mask_;
    std::size_t filled_ = 0;
};

/// Rectangle of size (w, h) centred at (cx, cy), clipped to the image.
Rect centered(std::int64_t cx, std::int64_t cy, std::int64_t w, std::int64_t h, std::size_t width,
              std::size_t height) {
    const std::int64_t x0 = cx - w / 2;
    const std::int64_t y0 = cy - h / 2;
    Rect r;
    r.x0 = static_cast<std::size_t>(std::clamp<std::int64_t>(x0, 0, static_cast<std::int64_t>(width)));
    r.y0 = static_cast<std::size_t>(std::clamp<std::int64_t>(y0, 0, static_cast<std::int64_t>(height)));
    r.x1 = static_cast<std::size_t>(std::clamp<std::int64_t>(x0 + w, 0, static_cast<std::int64_t>(width)));
    r.y1 = static_cast<std::size_t>(std::clamp<std::int64_t>(y0 + h, 0, static_cast<std::int64_t>(height)));
    return r;
}

Rect random_rect(Rng& rng, std::size_t height, std::size_t width, double ratio) {
    const auto max_w = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(width * ratio)));
    const auto max_h = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(height * ratio)));
    const auto w = static_cast<std::int64_t>(rng.uniform_int(1, max_w));
    const auto h = static_cast<std::int64_t>(rng.uniform_int(1, max_h));
    const auto cx = static_cast<std::int64_t>(rng.uniform_int(0, width - 1));
    const auto cy = static_cast<std::int64_t>(rng.uniform_int(0, height - 1));
    return centered(cx, cy, w, h, width, height);
}

/// Smallest square (clipped) around the centre of the least-covered quadrant
/// that lifts coverage to the target. Uses a prefix-sum table so each probe is O(1).
Rect deficit_rect(const BinaryMask& mask, std::size_t filled, double ratio) {
    const std::size_t height = mask.height();
    const std::size_t width = mask.width();
    std::vector<std::size_t> prefix((height + 1) * (width + 1), 0);
    auto at = [&](std::size_t y, std::size_t x) -> std::size_t& { return prefix[y * (width + 1) + x]; };
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            at(y + 1, x + 1) = at(y, x + 1) + at(y + 1, x) - at(y, x) + mask.at(y, x);
        }
    }
    auto ones_in = [&](const Rect& r) { return at(r.y1, r.x1) - at(r.y0, r.x1) - at(r.y1, r.x0) + at(r.y0, r.x0); };

    const std::size_t mid_y = height / 2;
    const std::size_t mid_x = width / 2;
    const std::array<Rect, 4> quadrants{Rect{0, 0, mid_x, mid_y}, Rect{mid_x, 0, width, mid_y},
                                        Rect{0, mid_y, mid_x, height}, Rect{mid_x, mid_y, width, height}};
    std::size_t best = 0;
    double best_cover = 2.0;
    for (std::size_t q = 0; q < quadrants.size(); ++q) {
        const Rect& r = quadrants[q];
        if (r.area() == 0) continue;
        const double cover = static_cast<double>(ones_in(r)) / static_cast<double>(r.area());
        if (cover < best_cover) {
            best_cover = cover;
            best = q;
        }
    }
    const Rect& quad = quadrants[best];
    const auto cx = static_cast<std::int64_t>((quad.x0 + quad.x1) / 2);
    const auto cy = static_cast<std::int64_t>((quad.y0 + quad.y1) / 2);
    const double total = static_cast<double>(height * width);

    auto grown = [&](std::int64_t radius) {
        return centered(cx, cy, 2 * radius + 1, 2 * radius + 1, width, height);
    };
    auto enough = [&](std::int64_t radius) {
        const Rect r = grown(radius);
        const std::size_t after = filled + r.area() - ones_in(r);
        return static_cast<double>(after) / total >= ratio;
    };
    // A square of radius max(h, w) covers the whole image from any centre.
    std::int64_t lo = 0;
    std::int64_t hi = static_cast<std::int64_t>(std::max(height, width));
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (enough(mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Rect r = grown(lo);
    r.deficit_fill = true;
    return r;
}

}  // namespace

GeneratedMask generate_mask_with_log(std::size_t height, std::size_t width, const MaskGenConfig& config) {
    config.validate();
    Canvas canvas(height, width);
    std::vector<Rect> log;
    if (config.ratio <= 0.0) return {canvas.release(), log};

    Rng rng(config.seed);
    const auto initial = rng.uniform_int(1, config.max_rectangles);
    for (std::uint64_t i = 0; i < initial; ++i) {
        log.push_back(random_rect(rng, height, width, config.ratio));
        canvas.paint(log.back());
    }
    const std::size_t attempts = config.max_rectangles * 10;
    for (std::size_t i = 0; i < attempts && !canvas.reached(config.ratio); ++i) {
        log.push_back(random_rect(rng, height, width, config.ratio));
        canvas.paint(log.back());
    }
    if (!canvas.reached(config.ratio)) {
        log.push_back(deficit_rect(canvas.mask(), canvas.filled(), config.ratio));
        canvas.paint(log.back());
    }
    return {canvas.release(), std::move(log)};
}

BinaryMask generate_mask(std::size_t height, std::size_t width, const MaskGenConfig& config) {
    return generate_mask_with_log(height, width, config).mask;
}

BinaryMask rasterize(std::size_t height, std::size_t width, const std::vector<Rect>& rectangles) {
    BinaryMask mask(height, width);
    for (const Rect& r : rectangles) {
        for (std::size_t y = r.y0; y < std::min(r.y1, height); ++y) {
            for (std::size_t x = r.x0; x < std::min(r.x1, width); ++x) mask.set(y, x, true);
        }
    }
    return mask;
}

std::vector<BinaryMask> mask_batch(const std::vector<Resolution>& view_sizes, const MaskGenConfig& config) {
    if (view_sizes.empty()) throw ValidationError("mask_batch needs at least one view");
    std::vector<BinaryMask> masks;
    masks.reserve(view_sizes.size());
    for (std::size_t i = 0; i < view_sizes.size(); ++i) {
        MaskGenConfig per_view = config;
        per_view.seed = config.seed + i;
        masks.push_back(generate_mask(view_sizes[i].height, view_sizes[i].width, per_view));
    }
    return masks;
}

std::vector<BinaryMask> mask_batch(const viewgen::ViewSet& views, const MaskGenConfig& config) {
    std::vector<Resolution> sizes;
    sizes.reserve(views.count());
    for (const auto& view : views.views) sizes.push_back(view.resolution());
    return mask_batch(sizes, config);
}

std::string rectangles_to_json(const std::vector<Rect>& rectangles) {
    nlohmann::json doc = nlohmann::json::array();
    for (const Rect& r : rectangles) {
        doc.push_back({{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}, {"deficit_fill", r.deficit_fill}});
    }
    return doc.dump();
}

std::vector<Rect> rectangles_from_json(const std::string& text) {
    std::vector<Rect> rectangles;
    for (const auto& item : nlohmann::json::parse(text)) {
        rectangles.push_back({item.at("x0").get<std::size_t>(), item.at("y0").get<std::size_t>(),
                              item.at("x1").get<std::size_t>(), item.at("y1").get<std::size_t>(),
                              item.value("deficit_fill", false)});
    }
    return rectangles;
}

}  // namespace faithfill::maskgen
