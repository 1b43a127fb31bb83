#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace faithfill {

struct Resolution {
    std::size_t height = 512;
    std::size_t width = 512;

    friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// H x W x 3 RGB image, interleaved, intensities in [0, 1].
class ImageBuffer {
public:
    static constexpr std::size_t kChannels = 3;

    ImageBuffer(std::size_t height, std::size_t width, double fill = 0.0);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t channels() const { return kChannels; }
    Resolution resolution() const { return {height_, width_}; }
    std::size_t pixel_count() const { return height_ * width_; }

    double& at(std::size_t y, std::size_t x, std::size_t c) { return data_[(y * width_ + x) * kChannels + c]; }
    double at(std::size_t y, std::size_t x, std::size_t c) const {
        return data_[(y * width_ + x) * kChannels + c];
    }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    std::size_t height_;
    std::size_t width_;
    std::vector<double> data_;
};

/// H x W map of {0, 1}. 1 = region to fill, 0 = region to keep.
class BinaryMask {
public:
    BinaryMask(std::size_t height, std::size_t width, std::uint8_t fill = 0);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    Resolution resolution() const { return {height_, width_}; }
    std::size_t pixel_count() const { return height_ * width_; }

    std::uint8_t at(std::size_t y, std::size_t x) const { return values_[y * width_ + x]; }
    void set(std::size_t y, std::size_t x, bool fill) { values_[y * width_ + x] = fill ? 1 : 0; }

    std::span<const std::uint8_t> values() const { return values_; }

    std::size_t count_fill() const;
    double coverage() const { return static_cast<double>(count_fill()) / static_cast<double>(pixel_count()); }
    BinaryMask inverted() const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t height_;
    std::size_t width_;
    std::vector<std::uint8_t> values_;
};

ImageBuffer resize_bilinear(const ImageBuffer& image, Resolution size);

/// Nearest-neighbour resampling; the result is binary by construction.
BinaryMask resize_nearest(const BinaryMask& mask, Resolution size);

/// image ⊙ (1 - mask): zeroes the fill region.
ImageBuffer apply_inverted_mask(const ImageBuffer& image, const BinaryMask& mask);

/// Takes `filled` where mask == 1 and `keep` where mask == 0.
ImageBuffer composite(const ImageBuffer& keep, const ImageBuffer& filled, const BinaryMask& mask);

/// Largest per-channel absolute difference over pixels where mask == 0.
double max_deviation_outside(const ImageBuffer& a, const ImageBuffer& b, const BinaryMask& mask);

}  // namespace faithfill
