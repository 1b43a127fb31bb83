#pragma once

#include "faithfill/core/image.hpp"
#include "faithfill/diffusion/latent.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace faithfill::diffusion {

/// Image <-> latent mapping (the autoencoder seam).
class LatentCodec {
public:
    virtual ~LatentCodec() = default;
    virtual std::size_t latent_channels() const = 0;
    /// Spatial downsampling factor between image and latent.
    virtual std::size_t factor() const = 0;
    virtual LatentTensor encode(const ImageBuffer& image) const = 0;
    virtual ImageBuffer decode(const LatentTensor& latent) const = 0;
};

/// Desk-scale autoencoder: f x f area averaging, then the fixed projection
///   z = P (2x - 1),  P = [I3 ; (1/3, 1/3, 1/3)]  (4 x 3).
/// Decoding applies the pseudo-inverse and nearest-neighbour upsampling, so
/// decode(encode(x)) == x (to rounding) for images constant on f x f blocks.
class ToyAutoencoder final : public LatentCodec {
public:
    explicit ToyAutoencoder(std::size_t factor = 8);

    std::size_t latent_channels() const override { return 4; }
    std::size_t factor() const override { return factor_; }
    LatentTensor encode(const ImageBuffer& image) const override;
    ImageBuffer decode(const LatentTensor& latent) const override;

private:
    std::size_t factor_;
    std::array<double, 12> projection_;  // 4 x 3
    std::array<double, 12> inverse_;     // 3 x 4
};

/// Mask at latent resolution: area average over factor x factor blocks,
/// thresholded at 0.5 (values exactly 0 or 1, row-major).
std::vector<double> downsample_mask(const BinaryMask& mask, std::size_t factor);

}  // namespace faithfill::diffusion
