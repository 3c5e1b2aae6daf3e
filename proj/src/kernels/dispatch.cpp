#include "semibounds/kernels.hpp"

namespace semibounds::kernels {

std::string_view to_string(Kernel k) noexcept {
  switch (k) {
    case Kernel::Auto:
      return "auto";
    case Kernel::Scalar:
      return "scalar";
    case Kernel::Avx2:
      return "avx2";
    case Kernel::Generic:
      return "generic";
  }
  return "unknown";
}

bool avx2_supported() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  if (!avx2_compiled()) return false;
  static const bool cpu = __builtin_cpu_supports("avx2");
  return cpu;
#else
  return false;
#endif
}

Kernel resolve(Kernel requested) noexcept {
  switch (requested) {
    case Kernel::Auto:
      return avx2_supported() ? Kernel::Avx2 : Kernel::Scalar;
    case Kernel::Avx2:
      return avx2_supported() ? Kernel::Avx2 : Kernel::Scalar;
    default:
      return requested;
  }
}

ScanFn scan_function(Kernel resolved) noexcept {
  return resolved == Kernel::Avx2 ? &scan_triples_avx2 : &scan_triples_scalar;
}

}  // namespace semibounds::kernels
