#include <cstdlib>
#include <string>

#include "mcagg/simd/kernels.hpp"

namespace mcagg::simd {

#ifndef MCAGG_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

std::string_view to_string(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar: return "scalar";
    case SimdLevel::AVX2: return "avx2";
  }
  return "unknown";
}

bool cpu_supports(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar: return true;
    case SimdLevel::AVX2:
#if defined(MCAGG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(SimdLevel level) {
  if (level == SimdLevel::AVX2 && cpu_supports(SimdLevel::AVX2)) return *avx2_kernels();
  return scalar_kernels();
}

namespace {

const KernelTable& resolve() {
  if (const char* env = std::getenv("MCAGG_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return scalar_kernels();
    if (want == "avx2") return kernels_for(SimdLevel::AVX2);
  }
  return kernels_for(SimdLevel::AVX2);
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = resolve();
  return table;
}

}  // namespace mcagg::simd
