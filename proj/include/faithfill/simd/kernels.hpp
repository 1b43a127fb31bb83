#pragma once

// Data-parallel inner loops used by the diffusion math and the metrics.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 (x86-64) or NEON (aarch64) variant. The variant is
// picked once at runtime from CPU capabilities; FAITHFILL_SIMD=scalar forces
// the reference path, which is useful for cross-machine bit-exact replay.
//
// Elementwise kernels (axpby, axpy, multiply, fir) perform the same IEEE
// operations in the same order on every path and are bit-identical across
// variants. Reductions (dot, sum, sum_squared_diff, matmul_nt) use lane-wise
// partial sums and agree to within rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace faithfill::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// True when this binary carries the variant and the CPU can execute it.
bool isa_supported(Isa isa);

/// Best supported variant on this machine.
Isa detect_isa();

/// Variant used by the dispatching wrappers below.
Isa active_isa();

/// Overrides the active variant (tests, replay). Throws if unsupported.
void set_active_isa(Isa isa);

struct KernelTable {
    // out[i] = a * x[i] + b * y[i]
    void (*axpby)(double a, const double* x, double b, const double* y, double* out, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // out[i] = x[i] * y[i]
    void (*multiply)(const double* x, const double* y, double* out, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*sum_squared_diff)(const double* x, const double* y, std::size_t n);
    // out[i] = sum_k taps[k] * x[i + k * stride], for i in [0, n)
    void (*fir)(const double* x, std::size_t stride, const double* taps, std::size_t num_taps,
                double* out, std::size_t n);
    // c[r * cols + o] = sum_i a[r * inner + i] * b[o * inner + i]
    void (*matmul_nt)(const double* a, std::size_t rows, std::size_t inner, const double* b,
                      std::size_t cols, double* c);
};

const KernelTable& table(Isa isa);
const KernelTable& table();

void axpby(double a, std::span<const double> x, double b, std::span<const double> y,
           std::span<double> out);
void axpy(double a, std::span<const double> x, std::span<double> y);
void multiply(std::span<const double> x, std::span<const double> y, std::span<double> out);
double dot(std::span<const double> x, std::span<const double> y);
double sum(std::span<const double> x);
double sum_squared_diff(std::span<const double> x, std::span<const double> y);

/// Row-major product a (rows x inner) times b^T, b being (cols x inner).
void matmul_nt(std::span<const double> a, std::size_t rows, std::size_t inner,
               std::span<const double> b, std::size_t cols, std::span<double> c);

namespace scalar {
extern const KernelTable kTable;
}
#if defined(FAITHFILL_HAVE_AVX2)
namespace avx2 {
extern const KernelTable kTable;
}
#endif
#if defined(FAITHFILL_HAVE_NEON)
namespace neon {
extern const KernelTable kTable;
}
#endif

}  // namespace faithfill::simd
