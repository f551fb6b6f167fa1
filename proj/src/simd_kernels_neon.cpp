// NEON variants (aarch64). Two float64x2 accumulators emulate the four
// reduction stripes; arithmetic order matches the scalar reference exactly.

#include "gkflow/simd_kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <limits>

namespace gkflow::simd {
namespace neon {

static void add(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) o[i] = a[i] + b[i];
}
static void sub(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) o[i] = a[i] - b[i];
}
static void mul(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) o[i] = a[i] * b[i];
}
static void div(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, vdivq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) o[i] = a[i] / b[i];
}
static void scale(const double* a, double s, double* o, std::size_t n) {
  float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(o + i, vmulq_f64(vld1q_f64(a + i), vs));
  for (; i < n; ++i) o[i] = a[i] * s;
}
static void scale_add(const double* a, double s, const double* b, double* o,
                      std::size_t n) {
  float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t p = vmulq_f64(vld1q_f64(a + i), vs);
    vst1q_f64(o + i, vaddq_f64(p, vld1q_f64(b + i)));
  }
  for (; i < n; ++i) {
    double p = a[i] * s;
    o[i] = p + b[i];
  }
}
static double sum(const double* a, std::size_t n) {
  float64x2_t acc01 = vdupq_n_f64(0.0), acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc01 = vaddq_f64(acc01, vld1q_f64(a + i));
    acc23 = vaddq_f64(acc23, vld1q_f64(a + i + 2));
  }
  double s[4] = {vgetq_lane_f64(acc01, 0), vgetq_lane_f64(acc01, 1),
                 vgetq_lane_f64(acc23, 0), vgetq_lane_f64(acc23, 1)};
  for (; i < n; ++i) s[i % 4] += a[i];
  return (s[0] + s[1]) + (s[2] + s[3]);
}
static double sum_sq(const double* a, std::size_t n) {
  float64x2_t acc01 = vdupq_n_f64(0.0), acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float64x2_t v0 = vld1q_f64(a + i), v1 = vld1q_f64(a + i + 2);
    acc01 = vaddq_f64(acc01, vmulq_f64(v0, v0));
    acc23 = vaddq_f64(acc23, vmulq_f64(v1, v1));
  }
  double s[4] = {vgetq_lane_f64(acc01, 0), vgetq_lane_f64(acc01, 1),
                 vgetq_lane_f64(acc23, 0), vgetq_lane_f64(acc23, 1)};
  for (; i < n; ++i) s[i % 4] += a[i] * a[i];
  return (s[0] + s[1]) + (s[2] + s[3]);
}
static double vmin(const double* a, std::size_t n) {
  double m = a[0];
  for (std::size_t i = 1; i < n; ++i)
    if (a[i] < m) m = a[i];
  return m;
}
static double vmax(const double* a, std::size_t n) {
  double m = a[0];
  for (std::size_t i = 1; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}
static double max_abs(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vabsq_f64(vld1q_f64(a + i)));
  double m = vgetq_lane_f64(acc, 0);
  if (vgetq_lane_f64(acc, 1) > m) m = vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    double v = std::fabs(a[i]);
    if (v > m) m = v;
  }
  return m;
}
static bool all_finite(const double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}
static void cmul_interleaved(double* xy, const double* m, std::size_t nc) {
  for (std::size_t i = 0; i < nc; ++i) {
    float64x2_t x = vld1q_f64(xy + 2 * i);
    float64x2_t mv = vld1q_f64(m + 2 * i);
    float64x2_t mre = vdupq_laneq_f64(mv, 0);
    float64x2_t mim = vdupq_laneq_f64(mv, 1);
    float64x2_t xsw = vextq_f64(x, x, 1);
    float64x2_t t1 = vmulq_f64(x, mre);
    float64x2_t t2 = vmulq_f64(xsw, mim);
    // lanes: re = t1[0] - t2[0], im = t1[1] + t2[1]
    double re = vgetq_lane_f64(t1, 0) - vgetq_lane_f64(t2, 0);
    double im = vgetq_lane_f64(t1, 1) + vgetq_lane_f64(t2, 1);
    xy[2 * i] = re;
    xy[2 * i + 1] = im;
  }
}

}  // namespace neon

const Kernels* neon_kernels() {
  static const Kernels k = {
      "neon",        neon::add,     neon::sub,     neon::mul,
      neon::div,     neon::scale,   neon::scale_add, neon::sum,
      neon::sum_sq,  neon::vmin,    neon::vmax,    neon::max_abs,
      neon::all_finite, neon::cmul_interleaved,
  };
  return &k;
}

}  // namespace gkflow::simd

#endif  // aarch64
