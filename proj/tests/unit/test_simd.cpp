#include "faithfill/core/rng.hpp"
#include "faithfill/simd/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace faithfill;
using namespace faithfill::simd;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

std::vector<Isa> variants() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        if (isa_supported(isa)) out.push_back(isa);
    }
    return out;
}

}  // namespace

TEST_CASE("scalar variant is always available and selectable") {
    CHECK(isa_supported(Isa::scalar));
    const Isa before = active_isa();
    set_active_isa(Isa::scalar);
    CHECK(active_isa() == Isa::scalar);
    set_active_isa(before);
    CHECK(isa_supported(detect_isa()));
}

TEST_CASE("selecting an unsupported variant throws") {
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        if (!isa_supported(isa)) CHECK_THROWS(set_active_isa(isa));
    }
}

TEST_CASE("elementwise kernels are bit-identical to scalar") {
    const auto& ref = table(Isa::scalar);
    for (Isa isa : variants()) {
        CAPTURE(isa_name(isa));
        const auto& k = table(isa);
        for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 67u}) {
            CAPTURE(n);
            const auto x = random_vector(n, 1 + n);
            const auto y = random_vector(n, 100 + n);
            std::vector<double> a(n), b(n);

            ref.axpby(0.3, x.data(), -1.7, y.data(), a.data(), n);
            k.axpby(0.3, x.data(), -1.7, y.data(), b.data(), n);
            CHECK(a == b);

            a = y;
            b = y;
            ref.axpy(2.5, x.data(), a.data(), n);
            k.axpy(2.5, x.data(), b.data(), n);
            CHECK(a == b);

            ref.multiply(x.data(), y.data(), a.data(), n);
            k.multiply(x.data(), y.data(), b.data(), n);
            CHECK(a == b);
        }
    }
}

TEST_CASE("fir is bit-identical to scalar for row and column strides") {
    const auto& ref = table(Isa::scalar);
    const auto taps = random_vector(11, 7);
    for (Isa isa : variants()) {
        CAPTURE(isa_name(isa));
        const auto& k = table(isa);
        for (std::size_t n : {1u, 4u, 9u, 30u}) {
            for (std::size_t stride : {1u, 13u}) {
                const auto x = random_vector(n + 10 * stride + 1, 3 + n + stride);
                std::vector<double> a(n), b(n);
                ref.fir(x.data(), stride, taps.data(), taps.size(), a.data(), n);
                k.fir(x.data(), stride, taps.data(), taps.size(), b.data(), n);
                CHECK(a == b);
            }
        }
    }
}

TEST_CASE("reductions agree with scalar within rounding") {
    const auto& ref = table(Isa::scalar);
    for (Isa isa : variants()) {
        CAPTURE(isa_name(isa));
        const auto& k = table(isa);
        for (std::size_t n : {0u, 1u, 5u, 8u, 33u, 1000u}) {
            CAPTURE(n);
            const auto x = random_vector(n, 11 + n);
            const auto y = random_vector(n, 12 + n);
            const double tol = 1e-12 * (1.0 + static_cast<double>(n));
            CHECK(std::abs(ref.dot(x.data(), y.data(), n) - k.dot(x.data(), y.data(), n)) <= tol);
            CHECK(std::abs(ref.sum(x.data(), n) - k.sum(x.data(), n)) <= tol);
            CHECK(std::abs(ref.sum_squared_diff(x.data(), y.data(), n) - k.sum_squared_diff(x.data(), y.data(), n)) <=
                  tol);
        }
        const std::size_t rows = 5, inner = 11, cols = 7;
        const auto a = random_vector(rows * inner, 21);
        const auto b = random_vector(cols * inner, 22);
        std::vector<double> c_ref(rows * cols), c(rows * cols);
        ref.matmul_nt(a.data(), rows, inner, b.data(), cols, c_ref.data());
        k.matmul_nt(a.data(), rows, inner, b.data(), cols, c.data());
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(c_ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("scalar kernels match naive loops") {
    const auto x = random_vector(19, 5);
    const auto y = random_vector(19, 6);
    double dot_oracle = 0.0, ssd_oracle = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot_oracle += x[i] * y[i];
        ssd_oracle += (x[i] - y[i]) * (x[i] - y[i]);
    }
    CHECK(dot(x, y) == doctest::Approx(dot_oracle).epsilon(1e-14));
    CHECK(sum_squared_diff(x, y) == doctest::Approx(ssd_oracle).epsilon(1e-14));
}

TEST_CASE("span wrappers reject size mismatches") {
    std::vector<double> a(3), b(4), out(3);
    CHECK_THROWS(dot(a, b));
    CHECK_THROWS(multiply(a, b, out));
}
