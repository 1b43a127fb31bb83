#include "faithfill/core/error.hpp"
#include "faithfill/core/rng.hpp"
#include "faithfill/diffusion/objectives.hpp"
#include "faithfill/diffusion/schedule.hpp"

#include <doctest.h>

#include <cmath>

using namespace faithfill;
using namespace faithfill::diffusion;

namespace {

LatentTensor filled(std::size_t c, std::size_t h, std::size_t w, double v) { return LatentTensor(c, h, w, v); }

}  // namespace

TEST_CASE("linear schedule over 1000 steps runs from signal to noise") {
    const auto s = build_schedule(1000, ScheduleKind::linear);
    REQUIRE(s.steps() == 1000);
    CHECK(s.alpha(1) > 0.99);
    CHECK(s.alpha(1000) < 0.01);
    for (std::size_t t = 2; t <= 1000; ++t) CHECK(s.alpha(t) <= s.alpha(t - 1));
    CHECK(s.alpha(0) == 1.0);

    // Independent oracle: cumulative product of the linear beta ramp.
    double prod = 1.0;
    for (std::size_t t = 1; t <= 1000; ++t) {
        prod *= 1.0 - (1e-4 + (0.02 - 1e-4) * static_cast<double>(t - 1) / 999.0);
        CHECK(s.alpha(t) == doctest::Approx(prod).epsilon(1e-12));
    }
}

TEST_CASE("cosine schedule is valid and monotone") {
    const auto s = build_schedule(1000, ScheduleKind::cosine);
    for (std::size_t t = 1; t <= 1000; ++t) {
        CHECK(s.alpha(t) > 0.0);
        CHECK(s.alpha(t) <= 1.0);
        if (t > 1) CHECK(s.alpha(t) <= s.alpha(t - 1));
    }
    CHECK(s.alpha(1000) < 0.01);
}

TEST_CASE("degenerate schedule lengths") {
    CHECK(build_schedule(1, ScheduleKind::linear).steps() == 1);
    CHECK_THROWS_AS(build_schedule(0, ScheduleKind::linear), ValidationError);
    CHECK_THROWS_AS(NoiseSchedule(ScheduleKind::linear, {0.5, 0.7}), ValidationError);
    CHECK_THROWS_AS(NoiseSchedule(ScheduleKind::linear, {0.5, 0.0}), ValidationError);
}

TEST_CASE("fingerprints identify the schedule") {
    const auto a = build_schedule(1000, ScheduleKind::linear);
    CHECK(a.fingerprint() == build_schedule(1000, ScheduleKind::linear).fingerprint());
    CHECK(a.fingerprint() != build_schedule(999, ScheduleKind::linear).fingerprint());
    CHECK(a.fingerprint() != build_schedule(1000, ScheduleKind::cosine).fingerprint());
}

TEST_CASE("add_noise closed-form examples") {
    const NoiseSchedule s(ScheduleKind::linear, {1.0, 0.25});
    const auto z0 = filled(4, 2, 3, 0.0);
    const auto eps = filled(4, 2, 3, 1.0);
    const auto noised = add_noise(z0, 2, eps, s);
    for (double v : noised.data()) CHECK(v == std::sqrt(0.75));
    CHECK(std::sqrt(0.75) == doctest::Approx(0.8660).epsilon(1e-4));

    Rng rng(3);
    LatentTensor z(4, 2, 3), e(4, 2, 3);
    for (double& v : z.data()) v = rng.normal();
    for (double& v : e.data()) v = rng.normal();
    CHECK(add_noise(z, 1, e, s) == z);
    CHECK(mix_noise(z, e, 0.0) == e);
    CHECK(mix_noise(z, e, 1.0) == z);
}

TEST_CASE("add_noise rejects bad inputs") {
    const auto s = build_schedule(10, ScheduleKind::linear);
    const auto z = filled(4, 2, 2, 0.0);
    CHECK_THROWS_AS(add_noise(z, 0, z, s), ValidationError);
    CHECK_THROWS_AS(add_noise(z, 11, z, s), ValidationError);
    CHECK_THROWS_AS(add_noise(z, 1, filled(4, 2, 3, 0.0), s), ValidationError);
    auto bad = z;
    bad.data()[0] = std::nan("");
    CHECK_THROWS_AS(add_noise(bad, 1, z, s), ValidationError);
    CHECK_THROWS_AS(mix_noise(z, z, 1.5), ValidationError);
}

TEST_CASE("add_noise is affine in (z0, eps)") {
    const auto s = build_schedule(1000, ScheduleKind::linear);
    Rng rng(8);
    LatentTensor z(4, 8, 8), e(4, 8, 8), zero(4, 8, 8);
    for (double& v : z.data()) v = rng.normal();
    for (double& v : e.data()) v = rng.normal();
    for (std::size_t t : {1u, 250u, 999u}) {
        const auto full = add_noise(z, t, e, s);
        const auto signal = add_noise(z, t, zero, s);
        const auto noise = add_noise(zero, t, e, s);
        for (std::size_t i = 0; i < full.size(); ++i) {
            CHECK(full.data()[i] == doctest::Approx(signal.data()[i] + noise.data()[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("empirical variance follows alpha Var(z0) + (1 - alpha)") {
    const auto s = build_schedule(1000, ScheduleKind::linear);
    Rng rng(12);
    LatentTensor z(4, 128, 128), e(4, 128, 128);
    for (double& v : z.data()) v = rng.normal();
    for (double& v : e.data()) v = rng.normal();
    for (std::size_t t : {10u, 300u, 700u}) {
        const auto out = add_noise(z, t, e, s);
        double sum = 0.0, sum2 = 0.0;
        for (double v : out.data()) {
            sum += v;
            sum2 += v * v;
        }
        const double n = static_cast<double>(out.size());
        const double var = sum2 / n - (sum / n) * (sum / n);
        CHECK(std::abs(var - 1.0) < 0.05);
    }
}

TEST_CASE("text_loss uses mean reduction") {
    CHECK(text_loss(filled(1, 2, 2, 1.0), filled(1, 2, 2, 0.0)) == 1.0);
    const auto x = filled(4, 3, 3, 0.7);
    CHECK(text_loss(x, x) == 0.0);
    Rng rng(4);
    LatentTensor a(4, 5, 5), b(4, 5, 5);
    for (double& v : a.data()) v = rng.normal();
    for (double& v : b.data()) v = rng.normal();
    double oracle = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) oracle += (a.data()[i] - b.data()[i]) * (a.data()[i] - b.data()[i]);
    oracle /= static_cast<double>(a.size());
    CHECK(std::abs(text_loss(a, b) - oracle) < 1e-6);
    CHECK_THROWS_AS(text_loss(a, filled(4, 5, 4, 0.0)), ValidationError);
}
