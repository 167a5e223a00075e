#pragma once
// Dense double-precision kernels behind the rank-one tensor fit.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is picked once at startup from CPUID and can
// be overridden (tests pin each variant and compare against the reference).
// Vectorized variants reassociate sums, so they agree with the reference to
// rounding, not bit for bit.

#include <cstddef>
#include <string_view>

namespace chaos::simd {

enum class Isa { scalar, avx2 };

struct Kernels {
  Isa isa;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// sum_i (a[i] - alpha * x[i])^2
  double (*residual_sq)(const double* a, const double* x, double alpha,
                        std::size_t n);
  /// out[i] = 1 / a[i]
  void (*reciprocal)(const double* a, double* out, std::size_t n);
};

bool isa_supported(Isa isa) noexcept;

/// Kernel table for a specific instruction set. Throws ContractViolation when
/// the CPU (or the build) lacks it.
const Kernels& kernels_for(Isa isa);

/// Kernel table currently in use by the library.
const Kernels& kernels() noexcept;

/// Pins the active kernel table. Throws ContractViolation when unsupported.
void set_active_isa(Isa isa);

/// Best instruction set available on this machine.
Isa best_isa() noexcept;

std::string_view isa_name(Isa isa) noexcept;

}  // namespace chaos::simd
