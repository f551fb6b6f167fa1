// AVX2 variants. Compiled with -mavx2 only (no FMA: contraction would break
// bit-equality with the scalar reference). Tails reuse the same striped
// bookkeeping as the scalar kernels.

#include "gkflow/simd_kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace gkflow::simd {
namespace avx2 {

static void add(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] + b[i];
}
static void sub(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] - b[i];
}
static void mul(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] * b[i];
}
static void div(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_div_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] / b[i];
}
static void scale(const double* a, double s, double* o, std::size_t n) {
  __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
  for (; i < n; ++i) o[i] = a[i] * s;
}
static void scale_add(const double* a, double s, const double* b, double* o,
                      std::size_t n) {
  __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), vs);
    _mm256_storeu_pd(o + i, _mm256_add_pd(p, _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) {
    double p = a[i] * s;
    o[i] = p + b[i];
  }
}

static double sum(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  for (; i < n; ++i) s[i % 4] += a[i];
  return (s[0] + s[1]) + (s[2] + s[3]);
}
static double sum_sq(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  for (; i < n; ++i) s[i % 4] += a[i] * a[i];
  return (s[0] + s[1]) + (s[2] + s[3]);
}
static double vmin(const double* a, std::size_t n) {
  double m = a[0];
  std::size_t i = 0;
  if (n >= 4) {
    __m256d acc = _mm256_loadu_pd(a);
    for (i = 4; i + 4 <= n; i += 4) acc = _mm256_min_pd(acc, _mm256_loadu_pd(a + i));
    alignas(32) double s[4];
    _mm256_store_pd(s, acc);
    m = s[0];
    for (int j = 1; j < 4; ++j)
      if (s[j] < m) m = s[j];
  }
  for (; i < n; ++i)
    if (a[i] < m) m = a[i];
  return m;
}
static double vmax(const double* a, std::size_t n) {
  double m = a[0];
  std::size_t i = 0;
  if (n >= 4) {
    __m256d acc = _mm256_loadu_pd(a);
    for (i = 4; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(a + i));
    alignas(32) double s[4];
    _mm256_store_pd(s, acc);
    m = s[0];
    for (int j = 1; j < 4; ++j)
      if (s[j] > m) m = s[j];
  }
  for (; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}
static double max_abs(const double* a, std::size_t n) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(signmask, _mm256_loadu_pd(a + i)));
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  double m = s[0];
  for (int j = 1; j < 4; ++j)
    if (s[j] > m) m = s[j];
  for (; i < n; ++i) {
    double v = std::fabs(a[i]);
    if (v > m) m = v;
  }
  return m;
}
static bool all_finite(const double* a, std::size_t n) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_andnot_pd(signmask, _mm256_loadu_pd(a + i));
    // NaN compares false under LT_OQ, so it fails the mask just like Inf.
    __m256d ok = _mm256_cmp_pd(v, inf, _CMP_LT_OQ);
    if (_mm256_movemask_pd(ok) != 0xF) return false;
  }
  for (; i < n; ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}
static void cmul_interleaved(double* xy, const double* m, std::size_t nc) {
  std::size_t i = 0;
  // Two complex values per iteration: [ar ai br bi].
  for (; i + 2 <= nc; i += 2) {
    __m256d x = _mm256_loadu_pd(xy + 2 * i);
    __m256d mv = _mm256_loadu_pd(m + 2 * i);
    __m256d mre = _mm256_movedup_pd(mv);                  // [cr cr dr dr]
    __m256d mim = _mm256_permute_pd(mv, 0xF);             // [ci ci di di]
    __m256d xsw = _mm256_permute_pd(x, 0x5);              // [ai ar bi br]
    __m256d t1 = _mm256_mul_pd(x, mre);
    __m256d t2 = _mm256_mul_pd(xsw, mim);
    _mm256_storeu_pd(xy + 2 * i, _mm256_addsub_pd(t1, t2));
  }
  for (; i < nc; ++i) {
    double ar = xy[2 * i], ai = xy[2 * i + 1];
    double mr = m[2 * i], mi = m[2 * i + 1];
    double t1r = ar * mr, t2r = ai * mi;
    double t1i = ai * mr, t2i = ar * mi;
    xy[2 * i] = t1r - t2r;
    xy[2 * i + 1] = t1i + t2i;
  }
}

}  // namespace avx2

const Kernels* avx2_kernels() {
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  static const Kernels k = {
      "avx2",        avx2::add,     avx2::sub,     avx2::mul,
      avx2::div,     avx2::scale,   avx2::scale_add, avx2::sum,
      avx2::sum_sq,  avx2::vmin,    avx2::vmax,    avx2::max_abs,
      avx2::all_finite, avx2::cmul_interleaved,
  };
  return &k;
}

}  // namespace gkflow::simd

#endif  // x86
