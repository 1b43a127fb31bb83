#include "faithfill/core/error.hpp"
#include "faithfill/eval/metrics.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace faithfill;
using namespace faithfill::eval;

namespace {

// Direct 2-D windowed SSIM, one window at a time.
double ssim_oracle(const ImageBuffer& a, const ImageBuffer& b) {
    const int n = 11;
    double g[n];
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        g[k] = std::exp(-((k - 5) * (k - 5)) / (2.0 * 1.5 * 1.5));
        total += g[k];
    }
    for (double& v : g) v /= total;
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t y = 0; y + n <= a.height(); ++y) {
            for (std::size_t x = 0; x + n <= a.width(); ++x) {
                double ma = 0, mb = 0, aa = 0, bb = 0, ab = 0;
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < n; ++j) {
                        const double w = g[i] * g[j];
                        const double va = a.at(y + i, x + j, c), vb = b.at(y + i, x + j, c);
                        ma += w * va;
                        mb += w * vb;
                        aa += w * va * va;
                        bb += w * vb * vb;
                        ab += w * va * vb;
                    }
                }
                const double sa = aa - ma * ma, sb = bb - mb * mb, sab = ab - ma * mb;
                sum += ((2 * ma * mb + c1) * (2 * sab + c2)) / ((ma * ma + mb * mb + c1) * (sa + sb + c2));
                ++count;
            }
        }
    }
    return sum / static_cast<double>(count);
}

double psnr_oracle(const ImageBuffer& a, const ImageBuffer& b) {
    double se = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        se += d * d;
    }
    return 10.0 * std::log10(1.0 / (se / static_cast<double>(a.data().size())));
}

}  // namespace

TEST_CASE("window is a normalised Gaussian") {
    const auto w = ssim_window();
    double total = 0.0;
    for (double v : w) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(w[5] > w[4]);
    CHECK(w[0] == doctest::Approx(w[10]).epsilon(1e-15));
    CHECK(w[4] / w[5] == doctest::Approx(std::exp(-1.0 / 4.5)).epsilon(1e-12));
}

TEST_CASE("SSIM and PSNR agree with direct loops on random 64x64 pairs") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto a = testing::random_image(64, 64, 100 + s);
        auto b = a;
        const auto noise = testing::random_image(64, 64, 200 + s);
        for (std::size_t i = 0; i < b.data().size(); ++i)
            b.data()[i] = std::clamp(b.data()[i] + 0.3 * (noise.data()[i] - 0.5), 0.0, 1.0);
        CHECK(std::abs(ssim(a, b) - ssim_oracle(a, b)) <= 1e-6);
        CHECK(std::abs(psnr(a, b) - psnr_oracle(a, b)) <= 1e-6);
    }
}

TEST_CASE("identity and symmetry") {
    const auto a = testing::random_image(32, 40, 1);
    const auto b = testing::random_image(32, 40, 2);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
    CHECK(psnr(a, b) == psnr(b, a));
}

TEST_CASE("an inverted binary image is structurally unrelated") {
    ImageBuffer a(32, 32);
    for (std::size_t y = 0; y < 32; ++y)
        for (std::size_t x = 0; x < 32; ++x)
            for (std::size_t c = 0; c < 3; ++c) a.at(y, x, c) = ((x / 4 + y / 4) % 2) ? 1.0 : 0.0;
    auto inv = a;
    for (double& v : inv.data()) v = 1.0 - v;
    CHECK(ssim(a, inv) < 0.1);
}

TEST_CASE("a uniform offset of 0.1 is 20 dB") {
    const ImageBuffer a(16, 16, 0.3);
    const ImageBuffer b(16, 16, 0.4);
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("masked PSNR only looks at the fill region") {
    const auto a = testing::random_image(16, 16, 3);
    auto b = a;
    const auto mask = testing::box_mask(16, 16, 0, 0, 8, 16);
    for (std::size_t y = 0; y < 16; ++y)
        for (std::size_t x = 0; x < 16; ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                if (x < 8) b.at(y, x, c) = a.at(y, x, c) + 0.1;
                else b.at(y, x, c) = 0.0;
            }
    CHECK(psnr_masked(a, b, mask) == doctest::Approx(20.0).epsilon(1e-9));
    CHECK_THROWS_AS(psnr_masked(a, b, BinaryMask(16, 16)), ValidationError);
}

TEST_CASE("shape requirements") {
    CHECK_THROWS_AS(ssim(ImageBuffer(16, 16), ImageBuffer(16, 17)), ValidationError);
    CHECK_THROWS_AS(psnr(ImageBuffer(16, 16), ImageBuffer(17, 16)), ValidationError);
    CHECK_THROWS_AS(ssim(ImageBuffer(10, 40), ImageBuffer(10, 40)), ValidationError);
}
