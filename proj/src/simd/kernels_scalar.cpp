#include "faithfill/simd/kernels.hpp"

namespace faithfill::simd::scalar {
namespace {

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void multiply(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sum_squared_diff(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
    }
    return acc;
}

void fir(const double* x, std::size_t stride, const double* taps, std::size_t num_taps, double* out,
         std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
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

}  // namespace faithfill::simd::scalar
