#pragma once

// Dense inner-loop kernels used by the distance, centroid and covariance
// code. Every kernel has a scalar reference implementation; ISA-specific
// variants are compiled in separate translation units and picked at runtime.

#include <cstddef>
#include <span>
#include <string_view>

namespace mcagg::simd {

enum class SimdLevel { Scalar, AVX2 };

std::string_view to_string(SimdLevel level);

struct KernelTable {
  SimdLevel level;

  double (*dot)(const double* a, const double* b, std::size_t n);

  // Sum of p[k] * q[k] over the k with p[k] != 0. q may hold -inf (log 0)
  // where p is zero; those lanes contribute nothing.
  double (*masked_dot)(const double* p, const double* q, std::size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // max_k |a[k] - b[k]|
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);

  // out[k] = (x[k] - w[k]) / w[k]
  void (*relative_deviation)(const double* x, const double* w, double* out, std::size_t n);

  // a += alpha * x x^T, a is a full row-major n x n matrix
  void (*rank1_update)(double alpha, const double* x, double* a, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in.
const KernelTable* avx2_kernels();

bool cpu_supports(SimdLevel level);

// Table for the requested level, falling back to scalar if the level is
// unavailable on this build or CPU.
const KernelTable& kernels_for(SimdLevel level);

// Resolved once per process: the best level the CPU supports, unless the
// MCAGG_SIMD environment variable ("scalar" or "avx2") asks for another.
const KernelTable& active_kernels();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_kernels().dot(a.data(), b.data(), a.size());
}

inline double masked_dot(std::span<const double> p, std::span<const double> q) {
  return active_kernels().masked_dot(p.data(), q.data(), p.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active_kernels().axpy(alpha, x.data(), y.data(), x.size());
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  return active_kernels().max_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace mcagg::simd
