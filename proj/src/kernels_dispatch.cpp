#include "jtcomp/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace jtcomp::kernels {

bool avx2_available() {
#if defined(JTCOMP_BUILD_AVX2) && (defined(__x86_64__) || defined(_M_X64))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

#if !defined(JTCOMP_BUILD_AVX2)
const KernelTable& avx2_kernels() {
  throw std::runtime_error("avx2 kernels not built on this platform");
}
#endif

namespace {
const KernelTable* resolve() {
  if (const char* force = std::getenv("JTCOMP_KERNELS")) {
    if (std::strcmp(force, "scalar") == 0) return &scalar_kernels();
    if (std::strcmp(force, "avx2") == 0) {
      if (!avx2_available()) {
        throw std::runtime_error("JTCOMP_KERNELS=avx2 requested but AVX2 is unavailable");
      }
      return &avx2_kernels();
    }
    throw std::runtime_error("unknown JTCOMP_KERNELS value (use scalar or avx2)");
  }
  return avx2_available() ? &avx2_kernels() : &scalar_kernels();
}
}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable* table = resolve();
  return *table;
}

}  // namespace jtcomp::kernels
