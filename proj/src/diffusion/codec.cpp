#include "faithfill/diffusion/codec.hpp"

#include "faithfill/core/error.hpp"

#include <string>

namespace faithfill::diffusion {

ToyAutoencoder::ToyAutoencoder(std::size_t factor) : factor_(factor) {
    if (factor < 1) throw ValidationError("latent factor must be >= 1");
    const double third = 1.0 / 3.0;
    projection_ = {1, 0, 0,  //
                   0, 1, 0,  //
                   0, 0, 1,  //
                   third, third, third};
    // pinv(P) = (P^T P)^-1 P^T with P^T P = I + J/9, whose inverse is I - J/12.
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                const double inv = (r == k ? 1.0 : 0.0) - 1.0 / 12.0;
                acc += inv * projection_[c * 3 + k];
            }
            inverse_[r * 4 + c] = acc;
        }
    }
}

LatentTensor ToyAutoencoder::encode(const ImageBuffer& image) const {
    if (image.height() % factor_ != 0 || image.width() % factor_ != 0) {
        throw ValidationError("image " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                              " is not divisible by the latent factor " + std::to_string(factor_));
    }
    const std::size_t h = image.height() / factor_;
    const std::size_t w = image.width() / factor_;
    const double norm = 1.0 / static_cast<double>(factor_ * factor_);
    LatentTensor z(4, h, w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double rgb[3] = {0.0, 0.0, 0.0};
            for (std::size_t dy = 0; dy < factor_; ++dy) {
                for (std::size_t dx = 0; dx < factor_; ++dx) {
                    for (std::size_t c = 0; c < 3; ++c) rgb[c] += image.at(y * factor_ + dy, x * factor_ + dx, c);
                }
            }
            for (double& v : rgb) v = 2.0 * (v * norm) - 1.0;
            for (std::size_t k = 0; k < 4; ++k) {
                z.at(k, y, x) = projection_[k * 3] * rgb[0] + projection_[k * 3 + 1] * rgb[1] +
                                projection_[k * 3 + 2] * rgb[2];
            }
        }
    }
    return z;
}

ImageBuffer ToyAutoencoder::decode(const LatentTensor& latent) const {
    if (latent.channels() != 4) throw ValidationError("toy decoder expects 4 latent channels");
    ImageBuffer image(latent.height() * factor_, latent.width() * factor_);
    for (std::size_t y = 0; y < latent.height(); ++y) {
        for (std::size_t x = 0; x < latent.width(); ++x) {
            double rgb[3];
            for (std::size_t c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < 4; ++k) acc += inverse_[c * 4 + k] * latent.at(k, y, x);
                rgb[c] = 0.5 * (acc + 1.0);
            }
            for (std::size_t dy = 0; dy < factor_; ++dy) {
                for (std::size_t dx = 0; dx < factor_; ++dx) {
                    for (std::size_t c = 0; c < 3; ++c) image.at(y * factor_ + dy, x * factor_ + dx, c) = rgb[c];
                }
            }
        }
    }
    return image;
}

std::vector<double> downsample_mask(const BinaryMask& mask, std::size_t factor) {
    if (factor < 1 || mask.height() % factor != 0 || mask.width() % factor != 0) {
        throw ValidationError("mask is not divisible by the latent factor " + std::to_string(factor));
    }
    const std::size_t h = mask.height() / factor;
    const std::size_t w = mask.width() / factor;
    const std::size_t block = factor * factor;
    std::vector<double> out(h * w, 0.0);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            std::size_t count = 0;
            for (std::size_t dy = 0; dy < factor; ++dy) {
                for (std::size_t dx = 0; dx < factor; ++dx) count += mask.at(y * factor + dy, x * factor + dx);
            }
            out[y * w + x] = 2 * count >= block ? 1.0 : 0.0;
        }
    }
    return out;
}

}  // namespace faithfill::diffusion
