#include "mcagg/simd/kernels.hpp"

#include <cmath>

namespace mcagg::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

double masked_dot_scalar(const double* p, const double* q, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (p[k] != 0.0) s += p[k] * q[k];
  }
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t k = 0; k < n; ++k) m = std::fmax(m, std::fabs(a[k] - b[k]));
  return m;
}

void relative_deviation_scalar(const double* x, const double* w, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = (x[k] - w[k]) / w[k];
}

void rank1_update_scalar(double alpha, const double* x, double* a, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    const double s = alpha * x[r];
    double* row = a + r * n;
    for (std::size_t c = 0; c < n; ++c) row[c] += s * x[c];
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      SimdLevel::Scalar,   dot_scalar,
      masked_dot_scalar,   axpy_scalar,
      max_abs_diff_scalar, relative_deviation_scalar,
      rank1_update_scalar,
  };
  return table;
}

}  // namespace mcagg::simd
