#include "faithfill/diffusion/latent.hpp"

#include "faithfill/core/error.hpp"

#include <cmath>
#include <string>

namespace faithfill::diffusion {

LatentTensor::LatentTensor(std::size_t channels, std::size_t height, std::size_t width, double fill)
    : channels_(channels), height_(height), width_(width), data_(channels * height * width, fill) {
    if (channels == 0 || height == 0 || width == 0) throw ValidationError("latent dimensions must be positive");
}

void require_finite(const LatentTensor& tensor, std::string_view where) {
    for (double v : tensor.data()) {
        if (!std::isfinite(v)) throw ValidationError(std::string(where) + ": non-finite latent value");
    }
}

void require_same_shape(const LatentTensor& a, const LatentTensor& b, std::string_view where) {
    if (!a.same_shape(b)) {
        throw ValidationError(std::string(where) + ": shape mismatch (" + std::to_string(a.channels()) + "," +
                              std::to_string(a.height()) + "," + std::to_string(a.width()) + ") vs (" +
                              std::to_string(b.channels()) + "," + std::to_string(b.height()) + "," +
                              std::to_string(b.width()) + ")");
    }
}

}  // namespace faithfill::diffusion
