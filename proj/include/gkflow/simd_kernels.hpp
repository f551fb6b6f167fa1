#pragma once

#include <cstddef>

namespace gkflow::simd {

// Elementwise kernels over plain double arrays plus a handful of reductions.
//
// Every variant (scalar, AVX2, NEON) must produce bit-identical results:
//  * elementwise ops perform exactly one IEEE operation per output element,
//    never fused (no FMA anywhere);
//  * reductions accumulate in four stripes, stripe j summing the elements
//    with index == j (mod 4), combined as (s0 + s1) + (s2 + s3). The stripe
//    order is part of the kernel contract.
// cmul_interleaved multiplies an interleaved complex array by an interleaved
// complex multiplier in place, computed as re = a*c - b*d, im = b*c + a*d
// with exactly those four products and two additions.
struct Kernels {
  const char* name;
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*div)(const double*, const double*, double*, std::size_t);
  void (*scale)(const double*, double, double*, std::size_t);
  // out = a*s + b, unfused
  void (*scale_add)(const double*, double, const double*, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sum_sq)(const double*, std::size_t);
  double (*min)(const double*, std::size_t);
  double (*max)(const double*, std::size_t);
  double (*max_abs)(const double*, std::size_t);
  bool (*all_finite)(const double*, std::size_t);
  void (*cmul_interleaved)(double*, const double*, std::size_t);
};

const Kernels& scalar_kernels();

// Null when the build or the host does not support the variant.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

// Runtime-selected table. Honors GKFLOW_SIMD=scalar|avx2|neon (evaluated
// once); falls back to the best supported variant otherwise.
const Kernels& active();

}  // namespace gkflow::simd
