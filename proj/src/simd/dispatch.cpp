#include "faithfill/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace faithfill::simd {

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(FAITHFILL_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::neon:
#if defined(FAITHFILL_HAVE_NEON)
            return true;  // mandatory on aarch64
#else
            return false;
#endif
    }
    return false;
}

Isa detect_isa() {
    if (isa_supported(Isa::avx2)) return Isa::avx2;
    if (isa_supported(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

namespace {

Isa initial_isa() {
    if (const char* forced = std::getenv("FAITHFILL_SIMD")) {
        const std::string name{forced};
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
            if (name == isa_name(isa) && isa_supported(isa)) return isa;
        }
    }
    return detect_isa();
}

std::atomic<Isa>& active_slot() {
    static std::atomic<Isa> slot{initial_isa()};
    return slot;
}

}  // namespace

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw std::invalid_argument("SIMD variant not supported here: " + std::string(isa_name(isa)));
    }
    active_slot().store(isa, std::memory_order_relaxed);
}

const KernelTable& table(Isa isa) {
    switch (isa) {
#if defined(FAITHFILL_HAVE_AVX2)
        case Isa::avx2: return avx2::kTable;
#endif
#if defined(FAITHFILL_HAVE_NEON)
        case Isa::neon: return neon::kTable;
#endif
        default: return scalar::kTable;
    }
}

const KernelTable& table() { return table(active_isa()); }

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string("length mismatch in ") + what);
}

}  // namespace

void axpby(double a, std::span<const double> x, double b, std::span<const double> y,
           std::span<double> out) {
    require_same_size(x.size(), y.size(), "axpby");
    require_same_size(x.size(), out.size(), "axpby");
    table().axpby(a, x.data(), b, y.data(), out.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    require_same_size(x.size(), y.size(), "axpy");
    table().axpy(a, x.data(), y.data(), x.size());
}

void multiply(std::span<const double> x, std::span<const double> y, std::span<double> out) {
    require_same_size(x.size(), y.size(), "multiply");
    require_same_size(x.size(), out.size(), "multiply");
    table().multiply(x.data(), y.data(), out.data(), x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
    require_same_size(x.size(), y.size(), "dot");
    return table().dot(x.data(), y.data(), x.size());
}

double sum(std::span<const double> x) { return table().sum(x.data(), x.size()); }

double sum_squared_diff(std::span<const double> x, std::span<const double> y) {
    require_same_size(x.size(), y.size(), "sum_squared_diff");
    return table().sum_squared_diff(x.data(), y.data(), x.size());
}

void matmul_nt(std::span<const double> a, std::size_t rows, std::size_t inner,
               std::span<const double> b, std::size_t cols, std::span<double> c) {
    require_same_size(a.size(), rows * inner, "matmul_nt lhs");
    require_same_size(b.size(), cols * inner, "matmul_nt rhs");
    require_same_size(c.size(), rows * cols, "matmul_nt out");
    table().matmul_nt(a.data(), rows, inner, b.data(), cols, c.data());
}

}  // namespace faithfill::simd
