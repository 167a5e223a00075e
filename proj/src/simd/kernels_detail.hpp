#pragma once
// Raw kernel entry points. Include only from src/simd/.

#include <cstddef>

#if defined(__x86_64__) || defined(_M_X64)
#define CHAOS_SIMD_X86 1
#else
#define CHAOS_SIMD_X86 0
#endif

namespace chaos::simd::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) noexcept;
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) noexcept;
double residual_sq_scalar(const double* a, const double* x, double alpha,
                          std::size_t n) noexcept;
void reciprocal_scalar(const double* a, double* out, std::size_t n) noexcept;

#if CHAOS_SIMD_X86
double dot_avx2(const double* a, const double* b, std::size_t n) noexcept;
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) noexcept;
double residual_sq_avx2(const double* a, const double* x, double alpha,
                        std::size_t n) noexcept;
void reciprocal_avx2(const double* a, double* out, std::size_t n) noexcept;
#endif

}  // namespace chaos::simd::detail
