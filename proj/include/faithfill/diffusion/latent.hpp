#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace faithfill::diffusion {

/// (channels, height, width) tensor in latent units, channel-interleaved:
/// element (c, y, x) lives at (y * width + x) * channels + c, so each latent
/// pixel is one contiguous feature vector.
class LatentTensor {
public:
    LatentTensor() = default;
    LatentTensor(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);

    std::size_t channels() const { return channels_; }
    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t pixels() const { return height_ * width_; }
    std::size_t size() const { return data_.size(); }
    bool same_shape(const LatentTensor& other) const {
        return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
    }

    double& at(std::size_t c, std::size_t y, std::size_t x) { return data_[(y * width_ + x) * channels_ + c]; }
    double at(std::size_t c, std::size_t y, std::size_t x) const { return data_[(y * width_ + x) * channels_ + c]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    friend bool operator==(const LatentTensor&, const LatentTensor&) = default;

private:
    std::size_t channels_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

/// Throws ValidationError naming `where` if any element is NaN or infinite.
void require_finite(const LatentTensor& tensor, std::string_view where);

/// Throws ValidationError if the shapes differ.
void require_same_shape(const LatentTensor& a, const LatentTensor& b, std::string_view where);

}  // namespace faithfill::diffusion
