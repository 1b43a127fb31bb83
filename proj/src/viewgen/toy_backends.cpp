#include "faithfill/core/rng.hpp"
#include "faithfill/viewgen/viewgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace faithfill::viewgen {
namespace {

std::array<double, 3> border_median(const ImageBuffer& image) {
    std::array<double, 3> out{};
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<double> samples;
        for (std::size_t x = 0; x < image.width(); ++x) {
            samples.push_back(image.at(0, x, c));
            samples.push_back(image.at(image.height() - 1, x, c));
        }
        for (std::size_t y = 1; y + 1 < image.height(); ++y) {
            samples.push_back(image.at(y, 0, c));
            samples.push_back(image.at(y, image.width() - 1, c));
        }
        auto mid = samples.begin() + static_cast<std::ptrdiff_t>(samples.size() / 2);
        std::nth_element(samples.begin(), mid, samples.end());
        out[c] = *mid;
    }
    return out;
}

std::string format(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::vector<double> ThresholdSegmenter::segment(const ImageBuffer& image, const Hint& hint) {
    const auto background = options_.background.value_or(border_median(image));
    const std::size_t h = image.height();
    const std::size_t w = image.width();
    std::vector<double> alpha(h * w, 0.0);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                const double d = image.at(y, x, c) - background[c];
                d2 += d * d;
            }
            if (std::sqrt(d2 / 3.0) > options_.threshold) alpha[y * w + x] = 1.0;
        }
    }

    if (const auto* box = std::get_if<BoundingBox>(&hint)) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                if (x < box->x0 || x >= box->x1 || y < box->y0 || y >= box->y1) alpha[y * w + x] = 0.0;
            }
        }
    } else if (const auto* point = std::get_if<PointHint>(&hint)) {
        // Keep only the 4-connected foreground component under the point.
        std::vector<double> component(h * w, 0.0);
        if (alpha[point->y * w + point->x] > 0.0) {
            std::vector<std::size_t> stack{point->y * w + point->x};
            component[stack.back()] = 1.0;
            while (!stack.empty()) {
                const std::size_t idx = stack.back();
                stack.pop_back();
                const std::size_t y = idx / w;
                const std::size_t x = idx % w;
                const auto visit = [&](std::size_t ny, std::size_t nx) {
                    const std::size_t n = ny * w + nx;
                    if (alpha[n] > 0.0 && component[n] == 0.0) {
                        component[n] = 1.0;
                        stack.push_back(n);
                    }
                };
                if (y > 0) visit(y - 1, x);
                if (y + 1 < h) visit(y + 1, x);
                if (x > 0) visit(y, x - 1);
                if (x + 1 < w) visit(y, x + 1);
            }
        }
        alpha = std::move(component);
    }
    return alpha;
}

SynthesizedViews AffineViewBackend::synthesize(const ObjectCutout& cutout, std::size_t n) {
    const std::size_t h = cutout.height();
    const std::size_t w = cutout.width();
    const double gray = options_.canvas_gray;

    SynthesizedViews out;
    out.views.push_back(composite_on_canvas(cutout, gray));
    out.parameters.push_back({{"transform", "identity"}, {"seed", std::to_string(options_.seed)}});

    // Premultiplied colour and alpha, sampled bilinearly with zero outside.
    const auto sample = [&](double sy, double sx, std::array<double, 4>& px) {
        px = {0.0, 0.0, 0.0, 0.0};
        const double fy = std::floor(sy);
        const double fx = std::floor(sx);
        const double ty = sy - fy;
        const double tx = sx - fx;
        for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
                const double yy = fy + dy;
                const double xx = fx + dx;
                if (yy < 0 || xx < 0 || yy >= static_cast<double>(h) || xx >= static_cast<double>(w)) continue;
                const double weight = (dy ? ty : 1.0 - ty) * (dx ? tx : 1.0 - tx);
                const auto iy = static_cast<std::size_t>(yy);
                const auto ix = static_cast<std::size_t>(xx);
                const double a = cutout.alpha_at(iy, ix);
                for (std::size_t c = 0; c < 3; ++c) px[c] += weight * a * cutout.color.at(iy, ix, c);
                px[3] += weight * a;
            }
        }
    };

    const double cy = 0.5 * static_cast<double>(cutout.bbox.y0 + cutout.bbox.y1) - 0.5;
    const double cx = 0.5 * static_cast<double>(cutout.bbox.x0 + cutout.bbox.x1) - 0.5;
    for (std::size_t view = 1; view < n; ++view) {
        Rng rng(derive_seed(options_.seed, 0x71e3, view));
        const double angle_deg = (2.0 * rng.uniform() - 1.0) * options_.max_rotation_deg;
        const double scale = options_.min_scale + rng.uniform() * (options_.max_scale - options_.min_scale);
        const double shift_x = (2.0 * rng.uniform() - 1.0) * options_.max_shift * static_cast<double>(w);
        const double shift_y = (2.0 * rng.uniform() - 1.0) * options_.max_shift * static_cast<double>(h);
        const bool flip = rng.uniform() < options_.flip_probability;

        const double theta = angle_deg * std::numbers::pi / 180.0;
        const double cos_t = std::cos(theta);
        const double sin_t = std::sin(theta);
        ImageBuffer image(h, w);
        std::array<double, 4> px{};
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                // Inverse map: undo shift, rotation, scale, then flip about the object centre.
                const double dx = static_cast<double>(x) - cx - shift_x;
                const double dy = static_cast<double>(y) - cy - shift_y;
                double sx = (cos_t * dx + sin_t * dy) / scale;
                const double sy = (-sin_t * dx + cos_t * dy) / scale;
                if (flip) sx = -sx;
                sample(cy + sy, cx + sx, px);
                for (std::size_t c = 0; c < 3; ++c) image.at(y, x, c) = px[c] + (1.0 - px[3]) * gray;
            }
        }
        out.views.push_back(std::move(image));
        out.parameters.push_back({{"transform", "affine"},
                                  {"seed", std::to_string(options_.seed)},
                                  {"rotation_deg", format(angle_deg)},
                                  {"scale", format(scale)},
                                  {"shift_x", format(shift_x)},
                                  {"shift_y", format(shift_y)},
                                  {"flip", flip ? "1" : "0"}});
    }
    return out;
}

}  // namespace faithfill::viewgen
