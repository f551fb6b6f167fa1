#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gkflow/errors.hpp"

namespace gkflow {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Coordinates are x1..x4 with z = x1 + i*x2 spanning the plus factor and
// w = x3 + i*x4 spanning the minus factor. In the reduced mode fields are
// constant along x2 and x4 and only the (x1, x3) plane is stored.
enum class GridMode : std::uint32_t { Reduced2d = 0, Full4d = 1 };

struct GridSpec {
  GridMode mode = GridMode::Reduced2d;
  // Sizes along x1..x4. Reduced mode keeps n[1] == n[3] == 1.
  std::array<int, 4> n = {64, 1, 64, 1};
  std::array<double, 4> period = {kTwoPi, kTwoPi, kTwoPi, kTwoPi};

  void validate() const;  // throws ConfigError
  bool axis_present(int axis) const;
  std::size_t samples() const;
  // Volume of the stored domain (product of periods over present axes).
  double volume() const;
  double cell_volume() const { return volume() / double(samples()); }

  bool operator==(const GridSpec&) const = default;

  static GridSpec reduced(int n1, int n3, double p1 = kTwoPi, double p3 = kTwoPi);
  static GridSpec full(int n1, int n2, int n3, int n4);
};

enum class FieldKind { Real, Complex };

// A sampled scalar field, row-major over the present axes. Complex fields
// store split re/im channels. Fields are value types; every operation
// returns a new field.
struct ScalarField {
  GridSpec spec;
  FieldKind kind = FieldKind::Real;
  std::vector<double> re;
  std::vector<double> im;  // empty for real fields

  bool is_real() const { return kind == FieldKind::Real; }
  std::size_t size() const { return re.size(); }

  static ScalarField zeros(const GridSpec& g, FieldKind k = FieldKind::Real);
  static ScalarField constant(const GridSpec& g, double v);
  // fn(x1, x2, x3, x4) -> double, evaluated at every grid point
  static ScalarField sample(const GridSpec& g,
                            const std::function<double(double, double, double, double)>& fn);
};

// Coordinates of the flat index i.
std::array<double, 4> point_at(const GridSpec& g, std::size_t i);

// ---- pointwise algebra (real fast paths run on the SIMD kernels) ----

ScalarField add(const ScalarField& a, const ScalarField& b);
ScalarField sub(const ScalarField& a, const ScalarField& b);
ScalarField mul(const ScalarField& a, const ScalarField& b);
// Guarded: throws ConeViolation when min(b) <= eps_pos (real b only).
ScalarField div(const ScalarField& a, const ScalarField& b, double eps_pos = kDefaultEpsPos);
ScalarField scale(const ScalarField& a, double s);
ScalarField offset(const ScalarField& a, double c);
// Guarded elementwise log; real positive input only.
ScalarField log_field(const ScalarField& a, double eps_pos = kDefaultEpsPos,
                      const char* what = "log argument");
ScalarField exp_field(const ScalarField& a);
// |f|^2 as a real field (works for both kinds).
ScalarField abs2(const ScalarField& a);
ScalarField real_part(const ScalarField& a);
ScalarField conj_field(const ScalarField& a);
// Complex product a * conj(b).
ScalarField mul_conj(const ScalarField& a, const ScalarField& b);
ScalarField to_complex(const ScalarField& a);

template <class Fn>
ScalarField map_real(const ScalarField& a, Fn&& fn) {
  ScalarField out = ScalarField::zeros(a.spec);
  for (std::size_t i = 0; i < a.size(); ++i) out.re[i] = fn(a.re[i]);
  return out;
}
template <class Fn>
ScalarField zip_real(const ScalarField& a, const ScalarField& b, Fn&& fn) {
  ScalarField out = ScalarField::zeros(a.spec);
  for (std::size_t i = 0; i < a.size(); ++i) out.re[i] = fn(a.re[i], b.re[i]);
  return out;
}

// ---- reductions ----

enum class Reduce { Sup, Inf, Mean, L2, Integral };

// Complex fields reduce through their modulus; L2 is sqrt of the integral
// of |f|^2. Throws NonFiniteField on NaN/Inf samples.
double reduce(const ScalarField& f, Reduce kind);

// Convenience wrappers.
double sup(const ScalarField& f);
double inf(const ScalarField& f);
double mean(const ScalarField& f);
double sup_abs(const ScalarField& f);

// Minimum of a real field together with its flat index.
std::pair<double, std::size_t> min_location(const ScalarField& f);

// Throws ConeViolation carrying location when min(f) <= eps_pos.
void require_positive(const ScalarField& f, double eps_pos, const char* what);
void require_finite(const ScalarField& f, const char* what);

void check_same_grid(const ScalarField& a, const ScalarField& b, const char* what);

}  // namespace gkflow
