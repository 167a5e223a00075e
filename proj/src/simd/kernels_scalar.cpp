#include "kernels_detail.hpp"

namespace chaos::simd::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double residual_sq_scalar(const double* a, const double* x, double alpha,
                          std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - alpha * x[i];
    s += d * d;
  }
  return s;
}

void reciprocal_scalar(const double* a, double* out, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / a[i];
}

}  // namespace chaos::simd::detail
