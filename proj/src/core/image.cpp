#include "faithfill/core/image.hpp"

#include "faithfill/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace faithfill {

ImageBuffer::ImageBuffer(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width) {
    if (height == 0 || width == 0) throw ValidationError("image dimensions must be positive");
    data_.assign(height * width * kChannels, fill);
}

BinaryMask::BinaryMask(std::size_t height, std::size_t width, std::uint8_t fill)
    : height_(height), width_(width) {
    if (height == 0 || width == 0) throw ValidationError("mask dimensions must be positive");
    if (fill > 1) throw ValidationError("mask values must be 0 or 1");
    values_.assign(height * width, fill);
}

std::size_t BinaryMask::count_fill() const {
    return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::inverted() const {
    BinaryMask out(height_, width_);
    for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = values_[i] ? 0 : 1;
    return out;
}

namespace {

struct Tap {
    std::size_t lo;
    std::size_t hi;
    double frac;
};

std::vector<Tap> bilinear_taps(std::size_t src, std::size_t dst) {
    std::vector<Tap> taps(dst);
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    for (std::size_t i = 0; i < dst; ++i) {
        double pos = (static_cast<double>(i) + 0.5) * scale - 0.5;
        pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, src - 1);
        taps[i] = {lo, hi, pos - static_cast<double>(lo)};
    }
    return taps;
}

void require_same_shape(Resolution a, Resolution b, const char* what) {
    if (a != b) {
        throw ValidationError(std::string(what) + ": shape mismatch " + std::to_string(a.height) + "x" +
                              std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                              std::to_string(b.width));
    }
}

}  // namespace

ImageBuffer resize_bilinear(const ImageBuffer& image, Resolution size) {
    if (image.resolution() == size) return image;
    ImageBuffer out(size.height, size.width);
    const auto rows = bilinear_taps(image.height(), size.height);
    const auto cols = bilinear_taps(image.width(), size.width);
    for (std::size_t y = 0; y < size.height; ++y) {
        const Tap& ty = rows[y];
        for (std::size_t x = 0; x < size.width; ++x) {
            const Tap& tx = cols[x];
            for (std::size_t c = 0; c < ImageBuffer::kChannels; ++c) {
                const double top = image.at(ty.lo, tx.lo, c) * (1.0 - tx.frac) + image.at(ty.lo, tx.hi, c) * tx.frac;
                const double bottom =
                    image.at(ty.hi, tx.lo, c) * (1.0 - tx.frac) + image.at(ty.hi, tx.hi, c) * tx.frac;
                out.at(y, x, c) = top * (1.0 - ty.frac) + bottom * ty.frac;
            }
        }
    }
    return out;
}

BinaryMask resize_nearest(const BinaryMask& mask, Resolution size) {
    if (mask.resolution() == size) return mask;
    BinaryMask out(size.height, size.width);
    for (std::size_t y = 0; y < size.height; ++y) {
        const std::size_t sy = std::min(mask.height() - 1, (2 * y + 1) * mask.height() / (2 * size.height));
        for (std::size_t x = 0; x < size.width; ++x) {
            const std::size_t sx = std::min(mask.width() - 1, (2 * x + 1) * mask.width() / (2 * size.width));
            out.set(y, x, mask.at(sy, sx) != 0);
        }
    }
    return out;
}

ImageBuffer apply_inverted_mask(const ImageBuffer& image, const BinaryMask& mask) {
    require_same_shape(image.resolution(), mask.resolution(), "apply_inverted_mask");
    ImageBuffer out = image;
    for (std::size_t y = 0; y < image.height(); ++y) {
        for (std::size_t x = 0; x < image.width(); ++x) {
            if (mask.at(y, x)) {
                for (std::size_t c = 0; c < ImageBuffer::kChannels; ++c) out.at(y, x, c) = 0.0;
            }
        }
    }
    return out;
}

ImageBuffer composite(const ImageBuffer& keep, const ImageBuffer& filled, const BinaryMask& mask) {
    require_same_shape(keep.resolution(), mask.resolution(), "composite");
    require_same_shape(filled.resolution(), mask.resolution(), "composite");
    ImageBuffer out = keep;
    for (std::size_t y = 0; y < keep.height(); ++y) {
        for (std::size_t x = 0; x < keep.width(); ++x) {
            if (mask.at(y, x)) {
                for (std::size_t c = 0; c < ImageBuffer::kChannels; ++c) out.at(y, x, c) = filled.at(y, x, c);
            }
        }
    }
    return out;
}

double max_deviation_outside(const ImageBuffer& a, const ImageBuffer& b, const BinaryMask& mask) {
    require_same_shape(a.resolution(), b.resolution(), "max_deviation_outside");
    require_same_shape(a.resolution(), mask.resolution(), "max_deviation_outside");
    double worst = 0.0;
    for (std::size_t y = 0; y < a.height(); ++y) {
        for (std::size_t x = 0; x < a.width(); ++x) {
            if (mask.at(y, x)) continue;
            for (std::size_t c = 0; c < ImageBuffer::kChannels; ++c) {
                worst = std::max(worst, std::abs(a.at(y, x, c) - b.at(y, x, c)));
            }
        }
    }
    return worst;
}

}  // namespace faithfill
