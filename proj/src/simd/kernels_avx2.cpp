#ifdef __x86_64__
#ifndef __AVX2__
#error "this should be compiled with AVX2"
#endif
#endif

#include <immintrin.h>

#include <cmath>

#include "mcagg/simd/kernels.hpp"

namespace mcagg::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
  }
  for (; k + 4 <= n; k += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

double masked_dot_avx2(const double* p, const double* q, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d pv = _mm256_loadu_pd(p + k);
    __m256d prod = _mm256_mul_pd(pv, _mm256_loadu_pd(q + k));
    __m256d keep = _mm256_cmp_pd(pv, zero, _CMP_NEQ_OQ);
    acc = _mm256_add_pd(acc, _mm256_and_pd(keep, prod));
  }
  double s = hsum(acc);
  for (; k < n; ++k) {
    if (p[k] != 0.0) s += p[k] * q[k];
  }
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(y + k, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
  }
  for (; k < n; ++k) y[k] += alpha * x[k];
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, d));
  }
  double r = hmax(m);
  for (; k < n; ++k) r = std::fmax(r, std::fabs(a[k] - b[k]));
  return r;
}

void relative_deviation_avx2(const double* x, const double* w, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d wv = _mm256_loadu_pd(w + k);
    _mm256_storeu_pd(out + k, _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(x + k), wv), wv));
  }
  for (; k < n; ++k) out[k] = (x[k] - w[k]) / w[k];
}

void rank1_update_avx2(double alpha, const double* x, double* a, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) axpy_avx2(alpha * x[r], x, a + r * n, n);
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{
      SimdLevel::AVX2,   dot_avx2,
      masked_dot_avx2,   axpy_avx2,
      max_abs_diff_avx2, relative_deviation_avx2,
      rank1_update_avx2,
  };
  return &table;
}

}  // namespace mcagg::simd
