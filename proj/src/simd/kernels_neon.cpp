#include "faithfill/simd/kernels.hpp"

#include <arm_neon.h>

namespace faithfill::simd::neon {
namespace {

constexpr std::size_t kLanes = 2;

// Plain vmulq/vaddq (no vfmaq) so elementwise results match the scalar path.

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    const float64x2_t vb = vdupq_n_f64(b);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const float64x2_t ax = vmulq_f64(va, vld1q_f64(x + i));
        const float64x2_t by = vmulq_f64(vb, vld1q_f64(y + i));
        vst1q_f64(out + i, vaddq_f64(ax, by));
    }
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
    }
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void multiply(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) vst1q_f64(out + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    double total = vaddvq_f64(acc);
    for (; i < n; ++i) total += x[i] * y[i];
    return total;
}

double sum(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double total = vaddvq_f64(acc);
    for (; i < n; ++i) total += x[i];
    return total;
}

double sum_squared_diff(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
        acc = vaddq_f64(acc, vmulq_f64(d, d));
    }
    double total = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = x[i] - y[i];
        total += d * d;
    }
    return total;
}

void fir(const double* x, std::size_t stride, const double* taps, std::size_t num_taps, double* out,
         std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        float64x2_t acc = vdupq_n_f64(0.0);
        for (std::size_t k = 0; k < num_taps; ++k) {
            acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(taps[k]), vld1q_f64(x + i + k * stride)));
        }
        vst1q_f64(out + i, acc);
    }
    for (; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < num_taps; ++k) acc = acc + taps[k] * x[i + k * stride];
        out[i] = acc;
    }
}

void matmul_nt(const double* a, std::size_t rows, std::size_t inner, const double* b, std::size_t cols,
               double* c) {
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t o = 0; o < cols; ++o) c[r * cols + o] = dot(a + r * inner, b + o * inner, inner);
    }
}

}  // namespace

const KernelTable kTable{axpby, axpy, multiply, dot, sum, sum_squared_diff, fir, matmul_nt};

}  // namespace faithfill::simd::neon
