// Compiled with -mavx2 only; no FMA so elementwise results match the scalar path.
#include "faithfill/simd/kernels.hpp"

#include <immintrin.h>

namespace faithfill::simd::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

double horizontal_sum(__m256d v) {
    // ((l0 + l2) + (l1 + l3))
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    const __m128d swapped = _mm_unpackhi_pd(pair, pair);
    return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(ax, by));
    }
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), ax));
    }
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void multiply(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    double total = horizontal_sum(acc);
    for (; i < n; ++i) total += x[i] * y[i];
    return total;
}

double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double total = horizontal_sum(acc);
    for (; i < n; ++i) total += x[i];
    return total;
}

double sum_squared_diff(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double total = horizontal_sum(acc);
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
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < num_taps; ++k) {
            const __m256d tap = _mm256_set1_pd(taps[k]);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(tap, _mm256_loadu_pd(x + i + k * stride)));
        }
        _mm256_storeu_pd(out + i, acc);
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

}  // namespace faithfill::simd::avx2
