// Apache License, Version 2.0, refer to LICENSE.txt

// Compiled with -mavx2 -mfma; only reached after avx2::supported().

#include "bdc/kernels.hpp"

#include <cmath>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define BDC_HAVE_AVX2_TU 1
#else
#define BDC_HAVE_AVX2_TU 0
#endif

#if BDC_HAVE_AVX2_TU
// glibc libmvec, AVX2 variant of log.
extern "C" __m256d _ZGVdN4v_log(__m256d x);
#endif

namespace bdc::kernels::avx2 {

#if BDC_HAVE_AVX2_TU

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

bool supported() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

GatherSums gather_sum2(const double* a, const double* b, std::span<const int> idx) {
  const int* p = idx.data();
  const std::size_t n = idx.size();
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d l0 = _mm256_setzero_pd();
  __m256d l1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m128i i0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + k));
    const __m128i i1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + k + 4));
    s0 = _mm256_add_pd(s0, _mm256_i32gather_pd(a, i0, 8));
    l0 = _mm256_add_pd(l0, _mm256_i32gather_pd(b, i0, 8));
    s1 = _mm256_add_pd(s1, _mm256_i32gather_pd(a, i1, 8));
    l1 = _mm256_add_pd(l1, _mm256_i32gather_pd(b, i1, 8));
  }
  if (k + 4 <= n) {
    const __m128i i0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + k));
    s0 = _mm256_add_pd(s0, _mm256_i32gather_pd(a, i0, 8));
    l0 = _mm256_add_pd(l0, _mm256_i32gather_pd(b, i0, 8));
    k += 4;
  }
  GatherSums out{hsum(_mm256_add_pd(s0, s1)), hsum(_mm256_add_pd(l0, l1))};
  for (; k < n; ++k) {
    out.sum += a[p[k]];
    out.log_sum += b[p[k]];
  }
  return out;
}

double squared_distance(const double* x, const double* y, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= len; k += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x + k + 4), _mm256_loadu_pd(y + k + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  if (k + 4 <= len) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    k += 4;
  }
  double out = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < len; ++k) {
    const double diff = x[k] - y[k];
    out += diff * diff;
  }
  return out;
}

void log_batch(const double* x, double* out, std::size_t len) {
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) _mm256_storeu_pd(out + k, _ZGVdN4v_log(_mm256_loadu_pd(x + k)));
  for (; k < len; ++k) out[k] = std::log(x[k]);
}

#else

bool supported() { return false; }

GatherSums gather_sum2(const double* a, const double* b, std::span<const int> idx) {
  return scalar::gather_sum2(a, b, idx);
}

double squared_distance(const double* x, const double* y, std::size_t len) {
  return scalar::squared_distance(x, y, len);
}

void log_batch(const double* x, double* out, std::size_t len) { scalar::log_batch(x, out, len); }

#endif

}  // namespace bdc::kernels::avx2
