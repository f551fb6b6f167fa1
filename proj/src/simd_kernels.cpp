#include "gkflow/simd_kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace gkflow::simd {

namespace scalar {

static void add(const double* a, const double* b, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = a[i] + b[i];
}
static void sub(const double* a, const double* b, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = a[i] - b[i];
}
static void mul(const double* a, const double* b, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = a[i] * b[i];
}
static void div(const double* a, const double* b, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = a[i] / b[i];
}
static void scale(const double* a, double s, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = a[i] * s;
}
static void scale_add(const double* a, double s, const double* b, double* o,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double p = a[i] * s;
    o[i] = p + b[i];
  }
}

// Four-stripe accumulation, see header for the contract.
static double sum(const double* a, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i];
    s1 += a[i + 1];
    s2 += a[i + 2];
    s3 += a[i + 3];
  }
  for (; i < n; ++i) {
    switch (i % 4) {
      case 0: s0 += a[i]; break;
      case 1: s1 += a[i]; break;
      case 2: s2 += a[i]; break;
      default: s3 += a[i]; break;
    }
  }
  return (s0 + s1) + (s2 + s3);
}
static double sum_sq(const double* a, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * a[i];
    s1 += a[i + 1] * a[i + 1];
    s2 += a[i + 2] * a[i + 2];
    s3 += a[i + 3] * a[i + 3];
  }
  for (; i < n; ++i) {
    double q = a[i] * a[i];
    switch (i % 4) {
      case 0: s0 += q; break;
      case 1: s1 += q; break;
      case 2: s2 += q; break;
      default: s3 += q; break;
    }
  }
  return (s0 + s1) + (s2 + s3);
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
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
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
    double ar = xy[2 * i], ai = xy[2 * i + 1];
    double mr = m[2 * i], mi = m[2 * i + 1];
    double t1r = ar * mr, t2r = ai * mi;
    double t1i = ai * mr, t2i = ar * mi;
    xy[2 * i] = t1r - t2r;
    xy[2 * i + 1] = t1i + t2i;
  }
}

}  // namespace scalar

const Kernels& scalar_kernels() {
  static const Kernels k = {
      "scalar",        scalar::add,     scalar::sub,     scalar::mul,
      scalar::div,     scalar::scale,   scalar::scale_add, scalar::sum,
      scalar::sum_sq,  scalar::vmin,    scalar::vmax,    scalar::max_abs,
      scalar::all_finite, scalar::cmul_interleaved,
  };
  return k;
}

#if !(defined(__x86_64__) || defined(__i386__))
const Kernels* avx2_kernels() { return nullptr; }
#endif
#if !defined(__aarch64__)
const Kernels* neon_kernels() { return nullptr; }
#endif

static const Kernels& select() {
  const char* force = std::getenv("GKFLOW_SIMD");
  if (force) {
    if (std::strcmp(force, "scalar") == 0) return scalar_kernels();
    if (std::strcmp(force, "avx2") == 0 && avx2_kernels()) return *avx2_kernels();
    if (std::strcmp(force, "neon") == 0 && neon_kernels()) return *neon_kernels();
  }
  if (avx2_kernels()) return *avx2_kernels();
  if (neon_kernels()) return *neon_kernels();
  return scalar_kernels();
}

const Kernels& active() {
  static const Kernels& k = select();
  return k;
}

}  // namespace gkflow::simd
