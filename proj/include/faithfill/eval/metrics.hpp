#pragma once

#include "faithfill/core/image.hpp"

#include <array>
#include <cstddef>

namespace faithfill::eval {

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Normalised 11-tap Gaussian, sigma 1.5.
std::array<double, kSsimWindow> ssim_window();

/// Gaussian-windowed SSIM, dynamic range 1, averaged over every fully
/// contained window position and over channels. Images must be at least
/// 11 x 11.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

/// 10 log10(1 / MSE). Identical images give +infinity.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// PSNR restricted to pixels where mask == 1.
double psnr_masked(const ImageBuffer& a, const ImageBuffer& b, const BinaryMask& mask);

}  // namespace faithfill::eval
