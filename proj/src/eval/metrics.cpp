#include "faithfill/eval/metrics.hpp"

#include "faithfill/core/error.hpp"
#include "faithfill/simd/kernels.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace faithfill::eval {

namespace {

void require_same_size(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
    if (a.resolution() != b.resolution()) {
        throw ValidationError(std::string(what) + ": dimension mismatch " + std::to_string(a.height()) + "x" +
                              std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                              std::to_string(b.width()));
    }
}

// Separable valid-mode Gaussian filter of one H x W plane.
std::vector<double> gaussian_valid(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                   const std::array<double, kSsimWindow>& taps) {
    const auto& k = simd::table();
    const std::size_t oh = h - kSsimWindow + 1;
    const std::size_t ow = w - kSsimWindow + 1;
    std::vector<double> vertical(oh * w);
    for (std::size_t y = 0; y < oh; ++y) k.fir(plane.data() + y * w, w, taps.data(), kSsimWindow, &vertical[y * w], w);
    std::vector<double> out(oh * ow);
    for (std::size_t y = 0; y < oh; ++y) k.fir(&vertical[y * w], 1, taps.data(), kSsimWindow, &out[y * ow], ow);
    return out;
}

double mse_to_psnr(double mse) {
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

}  // namespace

std::array<double, kSsimWindow> ssim_window() {
    std::array<double, kSsimWindow> taps{};
    const double centre = (kSsimWindow - 1) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i) {
        const double d = static_cast<double>(i) - centre;
        taps[i] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
        total += taps[i];
    }
    for (double& t : taps) t /= total;
    return taps;
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_size(a, b, "ssim");
    const std::size_t h = a.height();
    const std::size_t w = a.width();
    if (h < kSsimWindow || w < kSsimWindow) {
        throw ValidationError("ssim: images must be at least 11x11, got " + std::to_string(h) + "x" +
                              std::to_string(w));
    }
    const double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
    const double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);
    const auto taps = ssim_window();
    const std::size_t n = h * w;

    std::vector<double> pa(n), pb(n), aa(n), bb(n), ab(n);
    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t c = 0; c < ImageBuffer::kChannels; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            pa[i] = a.data()[i * 3 + c];
            pb[i] = b.data()[i * 3 + c];
        }
        simd::multiply(pa, pa, aa);
        simd::multiply(pb, pb, bb);
        simd::multiply(pa, pb, ab);
        const auto mu_a = gaussian_valid(pa, h, w, taps);
        const auto mu_b = gaussian_valid(pb, h, w, taps);
        const auto e_aa = gaussian_valid(aa, h, w, taps);
        const auto e_bb = gaussian_valid(bb, h, w, taps);
        const auto e_ab = gaussian_valid(ab, h, w, taps);
        for (std::size_t i = 0; i < mu_a.size(); ++i) {
            const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
            const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
            const double cov = e_ab[i] - mu_a[i] * mu_b[i];
            const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
            const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
            total += num / den;
        }
        windows += mu_a.size();
    }
    return total / static_cast<double>(windows);
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_size(a, b, "psnr");
    return mse_to_psnr(simd::sum_squared_diff(a.data(), b.data()) / static_cast<double>(a.data().size()));
}

double psnr_masked(const ImageBuffer& a, const ImageBuffer& b, const BinaryMask& mask) {
    require_same_size(a, b, "psnr");
    if (mask.resolution() != a.resolution()) throw ValidationError("psnr: mask dimension mismatch");
    double sse = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
        if (!mask.values()[i]) continue;
        for (std::size_t c = 0; c < 3; ++c) {
            const double d = a.data()[i * 3 + c] - b.data()[i * 3 + c];
            sse += d * d;
        }
        count += 3;
    }
    if (count == 0) throw ValidationError("psnr: empty mask");
    return mse_to_psnr(sse / static_cast<double>(count));
}

}  // namespace faithfill::eval
