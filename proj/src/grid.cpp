#include "gkflow/grid.hpp"

#include <cmath>
#include <sstream>

#include "gkflow/simd_kernels.hpp"

namespace gkflow {

using simd::active;

void GridSpec::validate() const {
  for (int a = 0; a < 4; ++a) {
    if (axis_present(a)) {
      if (n[a] < 8 || (n[a] % 2) != 0) {
        std::ostringstream os;
        os << "grid size along x" << (a + 1) << " must be even and >= 8, got " << n[a];
        throw ConfigError(os.str());
      }
    } else if (n[a] != 1) {
      throw ConfigError("suppressed axis must have size 1 in reduced mode");
    }
    if (!(period[a] > 0.0)) throw ConfigError("grid periods must be positive");
  }
}

bool GridSpec::axis_present(int axis) const {
  if (mode == GridMode::Full4d) return true;
  return axis == 0 || axis == 2;
}

std::size_t GridSpec::samples() const {
  std::size_t s = 1;
  for (int a = 0; a < 4; ++a)
    if (axis_present(a)) s *= std::size_t(n[a]);
  return s;
}

double GridSpec::volume() const {
  double v = 1.0;
  for (int a = 0; a < 4; ++a)
    if (axis_present(a)) v *= period[a];
  return v;
}

GridSpec GridSpec::reduced(int n1, int n3, double p1, double p3) {
  GridSpec g;
  g.mode = GridMode::Reduced2d;
  g.n = {n1, 1, n3, 1};
  g.period = {p1, kTwoPi, p3, kTwoPi};
  g.validate();
  return g;
}

GridSpec GridSpec::full(int n1, int n2, int n3, int n4) {
  GridSpec g;
  g.mode = GridMode::Full4d;
  g.n = {n1, n2, n3, n4};
  g.validate();
  return g;
}

ScalarField ScalarField::zeros(const GridSpec& g, FieldKind k) {
  ScalarField f;
  f.spec = g;
  f.kind = k;
  f.re.assign(g.samples(), 0.0);
  if (k == FieldKind::Complex) f.im.assign(g.samples(), 0.0);
  return f;
}

ScalarField ScalarField::constant(const GridSpec& g, double v) {
  ScalarField f = zeros(g);
  f.re.assign(g.samples(), v);
  return f;
}

std::array<double, 4> point_at(const GridSpec& g, std::size_t i) {
  std::array<double, 4> x = {0, 0, 0, 0};
  if (g.mode == GridMode::Reduced2d) {
    std::size_t n3 = std::size_t(g.n[2]);
    std::size_t i1 = i / n3, i3 = i % n3;
    x[0] = g.period[0] * double(i1) / double(g.n[0]);
    x[2] = g.period[2] * double(i3) / double(g.n[2]);
  } else {
    std::size_t rem = i;
    std::size_t s4 = std::size_t(g.n[3]), s3 = std::size_t(g.n[2]), s2 = std::size_t(g.n[1]);
    std::size_t i4 = rem % s4; rem /= s4;
    std::size_t i3 = rem % s3; rem /= s3;
    std::size_t i2 = rem % s2; rem /= s2;
    std::size_t i1 = rem;
    x[0] = g.period[0] * double(i1) / double(g.n[0]);
    x[1] = g.period[1] * double(i2) / double(g.n[1]);
    x[2] = g.period[2] * double(i3) / double(g.n[2]);
    x[3] = g.period[3] * double(i4) / double(g.n[3]);
  }
  return x;
}

ScalarField ScalarField::sample(const GridSpec& g,
                                const std::function<double(double, double, double, double)>& fn) {
  ScalarField f = zeros(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto x = point_at(g, i);
    f.re[i] = fn(x[0], x[1], x[2], x[3]);
  }
  return f;
}

void check_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!(a.spec == b.spec)) throw ConfigError(std::string(what) + ": grid specs differ");
}

void require_finite(const ScalarField& f, const char* what) {
  const auto& k = active();
  bool ok = k.all_finite(f.re.data(), f.size());
  if (ok && !f.im.empty()) ok = k.all_finite(f.im.data(), f.im.size());
  if (!ok) throw NonFiniteField(std::string(what) + ": field contains NaN/Inf samples");
}

std::pair<double, std::size_t> min_location(const ScalarField& f) {
  double m = f.re[0];
  std::size_t at = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f.re[i] < m) { m = f.re[i]; at = i; }
  return {m, at};
}

void require_positive(const ScalarField& f, double eps_pos, const char* what) {
  if (!f.is_real()) throw ConfigError(std::string(what) + ": positivity check needs a real field");
  auto [m, at] = min_location(f);
  if (!(m > eps_pos)) {
    std::ostringstream os;
    os << what << ": min " << m << " at flat index " << at << " is <= " << eps_pos;
    throw ConeViolation(os.str(), m, at);
  }
}

namespace {

ScalarField binary_real(const ScalarField& a, const ScalarField& b,
                        void (*op)(const double*, const double*, double*, std::size_t)) {
  ScalarField out = ScalarField::zeros(a.spec);
  op(a.re.data(), b.re.data(), out.re.data(), a.size());
  return out;
}

}  // namespace

ScalarField add(const ScalarField& a, const ScalarField& b) {
  check_same_grid(a, b, "add");
  const auto& k = active();
  if (a.is_real() && b.is_real()) return binary_real(a, b, k.add);
  ScalarField ca = to_complex(a), cb = to_complex(b);
  ScalarField out = ScalarField::zeros(a.spec, FieldKind::Complex);
  k.add(ca.re.data(), cb.re.data(), out.re.data(), out.size());
  k.add(ca.im.data(), cb.im.data(), out.im.data(), out.size());
  return out;
}

ScalarField sub(const ScalarField& a, const ScalarField& b) {
  check_same_grid(a, b, "sub");
  const auto& k = active();
  if (a.is_real() && b.is_real()) return binary_real(a, b, k.sub);
  ScalarField ca = to_complex(a), cb = to_complex(b);
  ScalarField out = ScalarField::zeros(a.spec, FieldKind::Complex);
  k.sub(ca.re.data(), cb.re.data(), out.re.data(), out.size());
  k.sub(ca.im.data(), cb.im.data(), out.im.data(), out.size());
  return out;
}

ScalarField mul(const ScalarField& a, const ScalarField& b) {
  check_same_grid(a, b, "mul");
  const auto& k = active();
  if (a.is_real() && b.is_real()) return binary_real(a, b, k.mul);
  ScalarField ca = to_complex(a), cb = to_complex(b);
  ScalarField out = ScalarField::zeros(a.spec, FieldKind::Complex);
  std::vector<double> t1(a.size()), t2(a.size());
  k.mul(ca.re.data(), cb.re.data(), t1.data(), a.size());
  k.mul(ca.im.data(), cb.im.data(), t2.data(), a.size());
  k.sub(t1.data(), t2.data(), out.re.data(), a.size());
  k.mul(ca.im.data(), cb.re.data(), t1.data(), a.size());
  k.mul(ca.re.data(), cb.im.data(), t2.data(), a.size());
  k.add(t1.data(), t2.data(), out.im.data(), a.size());
  return out;
}

ScalarField div(const ScalarField& a, const ScalarField& b, double eps_pos) {
  check_same_grid(a, b, "div");
  if (!b.is_real()) throw ConfigError("div: denominator must be real");
  require_positive(b, eps_pos, "div denominator");
  const auto& k = active();
  if (a.is_real()) return binary_real(a, b, k.div);
  ScalarField out = ScalarField::zeros(a.spec, FieldKind::Complex);
  k.div(a.re.data(), b.re.data(), out.re.data(), a.size());
  k.div(a.im.data(), b.re.data(), out.im.data(), a.size());
  return out;
}

ScalarField scale(const ScalarField& a, double s) {
  ScalarField out = a;
  const auto& k = active();
  k.scale(a.re.data(), s, out.re.data(), a.size());
  if (!a.im.empty()) k.scale(a.im.data(), s, out.im.data(), a.size());
  return out;
}

ScalarField offset(const ScalarField& a, double c) {
  ScalarField out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out.re[i] = a.re[i] + c;
  return out;
}

ScalarField log_field(const ScalarField& a, double eps_pos, const char* what) {
  if (!a.is_real()) throw ConfigError("log_field: complex input");
  require_positive(a, eps_pos, what);
  return map_real(a, [](double v) { return std::log(v); });
}

ScalarField exp_field(const ScalarField& a) {
  if (!a.is_real()) throw ConfigError("exp_field: complex input");
  return map_real(a, [](double v) { return std::exp(v); });
}

ScalarField abs2(const ScalarField& a) {
  ScalarField out = ScalarField::zeros(a.spec);
  if (a.is_real()) {
    active().mul(a.re.data(), a.re.data(), out.re.data(), a.size());
  } else {
    for (std::size_t i = 0; i < a.size(); ++i)
      out.re[i] = a.re[i] * a.re[i] + a.im[i] * a.im[i];
  }
  return out;
}

ScalarField real_part(const ScalarField& a) {
  ScalarField out = ScalarField::zeros(a.spec);
  out.re = a.re;
  return out;
}

ScalarField conj_field(const ScalarField& a) {
  ScalarField out = a;
  if (!a.im.empty())
    for (std::size_t i = 0; i < a.size(); ++i) out.im[i] = -a.im[i];
  return out;
}

ScalarField mul_conj(const ScalarField& a, const ScalarField& b) {
  return mul(a, conj_field(b));
}

ScalarField to_complex(const ScalarField& a) {
  if (!a.is_real()) return a;
  ScalarField out = ScalarField::zeros(a.spec, FieldKind::Complex);
  out.re = a.re;
  return out;
}

double reduce(const ScalarField& f, Reduce kind) {
  require_finite(f, "reduce");
  const auto& k = active();
  const double cell = f.spec.cell_volume();
  if (f.is_real()) {
    switch (kind) {
      case Reduce::Sup: return k.max(f.re.data(), f.size());
      case Reduce::Inf: return k.min(f.re.data(), f.size());
      case Reduce::Mean: return k.sum(f.re.data(), f.size()) / double(f.size());
      case Reduce::L2: return std::sqrt(k.sum_sq(f.re.data(), f.size()) * cell);
      case Reduce::Integral: return k.sum(f.re.data(), f.size()) * cell;
    }
  }
  if (kind == Reduce::L2) {
    double s = k.sum_sq(f.re.data(), f.size()) + k.sum_sq(f.im.data(), f.size());
    return std::sqrt(s * cell);
  }
  // Remaining reductions act on the modulus.
  std::vector<double> m(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    m[i] = std::sqrt(f.re[i] * f.re[i] + f.im[i] * f.im[i]);
  switch (kind) {
    case Reduce::Sup: return k.max(m.data(), m.size());
    case Reduce::Inf: return k.min(m.data(), m.size());
    case Reduce::Mean: return k.sum(m.data(), m.size()) / double(m.size());
    case Reduce::Integral: return k.sum(m.data(), m.size()) * cell;
    default: return 0.0;  // unreachable
  }
}

double sup(const ScalarField& f) { return reduce(f, Reduce::Sup); }
double inf(const ScalarField& f) { return reduce(f, Reduce::Inf); }
double mean(const ScalarField& f) { return reduce(f, Reduce::Mean); }

double sup_abs(const ScalarField& f) {
  require_finite(f, "sup_abs");
  if (f.is_real()) return simd::active().max_abs(f.re.data(), f.size());
  return reduce(f, Reduce::Sup);
}

}  // namespace gkflow
