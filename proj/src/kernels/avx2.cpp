// Compiled with -mavx2 (and without -mfma); only reached after a runtime
// cpuid check.
#include "heartstack/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

namespace heartstack::kernels::avx2 {

namespace {

// (l0 + l2) + (l1 + l3), matching the scalar reference.
inline double reduce(__m256d acc) {
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, p);
  }
  double sum = reduce(acc);
  for (; i < n; ++i) {
    const double p = a[i] * b[i];
    sum = sum + p;
  }
  return sum;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double sum = reduce(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    const double p = d * d;
    sum = sum + p;
  }
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), p));
  }
  for (; i < n; ++i) {
    const double p = alpha * x[i];
    y[i] = y[i] + p;
  }
}

}  // namespace heartstack::kernels::avx2

#else

// Non-x86 build: the symbols exist so dispatch links, but cpu_has_avx2()
// is false and they are never selected.
namespace heartstack::kernels::avx2 {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
double squared_distance(const double* a, const double* b, std::size_t n) {
  return scalar::squared_distance(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
}  // namespace heartstack::kernels::avx2

#endif
