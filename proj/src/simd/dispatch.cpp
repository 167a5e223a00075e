#include <atomic>
#include <string>

#include "chaos/error.hpp"
#include "chaos/simd/kernels.hpp"
#include "kernels_detail.hpp"

namespace chaos::simd {
namespace {

constexpr Kernels kScalar{Isa::scalar, detail::dot_scalar, detail::axpy_scalar,
                          detail::residual_sq_scalar, detail::reciprocal_scalar};

#if CHAOS_SIMD_X86
constexpr Kernels kAvx2{Isa::avx2, detail::dot_avx2, detail::axpy_avx2,
                        detail::residual_sq_avx2, detail::reciprocal_avx2};
#endif

bool cpu_has_avx2() noexcept {
#if CHAOS_SIMD_X86 && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<const Kernels*>& active() {
  static std::atomic<const Kernels*> table{&kernels_for(best_isa())};
  return table;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

const Kernels& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw ContractViolation("instruction set not supported on this machine: " +
                            std::string(isa_name(isa)));
  }
#if CHAOS_SIMD_X86
  if (isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

const Kernels& kernels() noexcept { return *active().load(); }

void set_active_isa(Isa isa) { active().store(&kernels_for(isa)); }

Isa best_isa() noexcept { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace chaos::simd
