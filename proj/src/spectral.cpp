#include "gkflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "gkflow/simd_kernels.hpp"

namespace gkflow {

namespace {

// Multiplier composer: receives per-axis first-order factors c1 (i*k with
// the Nyquist mode zeroed), second-order factors c2 (-k^2, Nyquist kept)
// and the signed integer mode indices.
using Composer = std::function<std::complex<double>(
    const std::array<std::complex<double>, 4>&, const std::array<double, 4>&,
    const std::array<int, 4>&)>;

struct Workspace {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<double> a;  // sample-space buffer
  std::vector<double> b;  // half spectrum (r2c path only)
};

// One mutex guards planning, the multiplier cache and buffer reuse; FFTW
// planning is not thread safe and the workspaces are shared scratch.
std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, Workspace>& plan_cache() {
  static std::map<std::string, Workspace> c;
  return c;
}

std::map<std::string, std::vector<double>>& mult_cache() {
  static std::map<std::string, std::vector<double>> c;
  return c;
}

std::string size_key(const GridSpec& g) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d:%dx%dx%dx%d", int(g.mode), g.n[0], g.n[1],
                g.n[2], g.n[3]);
  return buf;
}

std::string dims_key(const GridSpec& g) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%s|%.17g,%.17g,%.17g,%.17g",
                size_key(g).c_str(), g.period[0], g.period[1], g.period[2],
                g.period[3]);
  return buf;
}

std::vector<int> present_axes(const GridSpec& g) {
  std::vector<int> p;
  for (int a = 0; a < 4; ++a)
    if (g.axis_present(a)) p.push_back(a);
  return p;
}

Workspace& c2c_workspace(const GridSpec& g) {
  Workspace& w = plan_cache()["c2c|" + size_key(g)];
  if (!w.fwd) {
    auto pax = present_axes(g);
    int dims[4];
    for (std::size_t i = 0; i < pax.size(); ++i) dims[i] = g.n[pax[i]];
    w.a.assign(2 * g.samples(), 0.0);
    auto* c = reinterpret_cast<fftw_complex*>(w.a.data());
    w.fwd = fftw_plan_dft(int(pax.size()), dims, c, c, FFTW_FORWARD, FFTW_ESTIMATE);
    w.bwd = fftw_plan_dft(int(pax.size()), dims, c, c, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  return w;
}

Workspace& r2c_workspace(const GridSpec& g) {
  Workspace& w = plan_cache()["r2c|" + size_key(g)];
  if (!w.fwd) {
    auto pax = present_axes(g);
    int dims[4];
    std::size_t spec_total = 1;
    for (std::size_t i = 0; i < pax.size(); ++i) {
      dims[i] = g.n[pax[i]];
      spec_total *= (i + 1 == pax.size()) ? std::size_t(dims[i] / 2 + 1)
                                          : std::size_t(dims[i]);
    }
    w.a.assign(g.samples(), 0.0);
    w.b.assign(2 * spec_total, 0.0);
    auto* c = reinterpret_cast<fftw_complex*>(w.b.data());
    w.fwd = fftw_plan_dft_r2c(int(pax.size()), dims, w.a.data(), c, FFTW_ESTIMATE);
    w.bwd = fftw_plan_dft_c2r(int(pax.size()), dims, c, w.a.data(), FFTW_ESTIMATE);
  }
  return w;
}

// Builds the interleaved complex multiplier over the (possibly half)
// spectrum, with the inverse-transform normalization folded in.
std::vector<double> build_multiplier(const GridSpec& g, bool half,
                                     const Composer& comp) {
  auto pax = present_axes(g);
  std::vector<int> sdims(pax.size());
  std::size_t total = 1;
  for (std::size_t i = 0; i < pax.size(); ++i) {
    sdims[i] = g.n[pax[i]];
    if (half && i + 1 == pax.size()) sdims[i] = sdims[i] / 2 + 1;
    total *= std::size_t(sdims[i]);
  }
  const double norm = 1.0 / double(g.samples());
  std::vector<double> m(2 * total);
  for (std::size_t s = 0; s < total; ++s) {
    std::array<std::complex<double>, 4> c1 = {};
    std::array<double, 4> c2 = {};
    std::array<int, 4> js = {0, 0, 0, 0};
    std::size_t rem = s;
    for (int i = int(pax.size()) - 1; i >= 0; --i) {
      const int j = int(rem % std::size_t(sdims[i]));
      rem /= std::size_t(sdims[i]);
      const int axis = pax[std::size_t(i)];
      const int na = g.n[axis];
      const int signed_j = (j <= na / 2) ? j : j - na;
      const double k = kTwoPi * double(signed_j) / g.period[axis];
      js[axis] = signed_j;
      c1[axis] = (j == na / 2) ? std::complex<double>(0.0, 0.0)
                               : std::complex<double>(0.0, k);
      c2[axis] = -k * k;
    }
    const std::complex<double> v = comp(c1, c2, js) * norm;
    m[2 * s] = v.real();
    m[2 * s + 1] = v.imag();
  }
  return m;
}

ScalarField apply_multiplier(const ScalarField& f, const char* tag,
                             const Composer& comp, bool preserves_real) {
  require_finite(f, "spectral input");
  const GridSpec& g = f.spec;
  std::lock_guard<std::mutex> lock(cache_mutex());
  const bool real_path = f.is_real() && preserves_real;
  const std::string mkey =
      std::string(tag) + "|" + dims_key(g) + (real_path ? "|h" : "|f");
  std::vector<double>& mult = mult_cache()[mkey];
  if (mult.empty()) mult = build_multiplier(g, real_path, comp);

  if (real_path) {
    Workspace& w = r2c_workspace(g);
    std::copy(f.re.begin(), f.re.end(), w.a.begin());
    fftw_execute(w.fwd);
    simd::active().cmul_interleaved(w.b.data(), mult.data(), w.b.size() / 2);
    fftw_execute(w.bwd);
    ScalarField out = ScalarField::zeros(g, FieldKind::Real);
    std::copy(w.a.begin(), w.a.end(), out.re.begin());
    return out;
  }

  Workspace& w = c2c_workspace(g);
  const std::size_t ns = f.size();
  const double* im = f.is_real() ? nullptr : f.im.data();
  for (std::size_t i = 0; i < ns; ++i) {
    w.a[2 * i] = f.re[i];
    w.a[2 * i + 1] = im ? im[i] : 0.0;
  }
  fftw_execute(w.fwd);
  simd::active().cmul_interleaved(w.a.data(), mult.data(), ns);
  fftw_execute(w.bwd);
  ScalarField out = ScalarField::zeros(g, FieldKind::Complex);
  for (std::size_t i = 0; i < ns; ++i) {
    out.re[i] = w.a[2 * i];
    out.im[i] = w.a[2 * i + 1];
  }
  return out;
}

const char* op_tag(DiffOp op) {
  switch (op) {
    case DiffOp::Dz: return "dz";
    case DiffOp::Dzbar: return "dzb";
    case DiffOp::Dw: return "dw";
    case DiffOp::Dwbar: return "dwb";
    case DiffOp::DzDzbar: return "dzzb";
    case DiffOp::DwDwbar: return "dwwb";
    case DiffOp::DzDw: return "dzdw";
    case DiffOp::Mixed4: return "mix4";
  }
  return "?";
}

}  // namespace

bool op_preserves_realness(DiffOp op, GridMode mode) {
  if (mode == GridMode::Reduced2d) return true;
  return op == DiffOp::DzDzbar || op == DiffOp::DwDwbar || op == DiffOp::Mixed4;
}

ScalarField differentiate(const ScalarField& f, DiffOp op) {
  const std::complex<double> I(0.0, 1.0);
  Composer comp;
  switch (op) {
    case DiffOp::Dz:
      comp = [I](const auto& c1, const auto&, const auto&) {
        return 0.5 * (c1[0] - I * c1[1]);
      };
      break;
    case DiffOp::Dzbar:
      comp = [I](const auto& c1, const auto&, const auto&) {
        return 0.5 * (c1[0] + I * c1[1]);
      };
      break;
    case DiffOp::Dw:
      comp = [I](const auto& c1, const auto&, const auto&) {
        return 0.5 * (c1[2] - I * c1[3]);
      };
      break;
    case DiffOp::Dwbar:
      comp = [I](const auto& c1, const auto&, const auto&) {
        return 0.5 * (c1[2] + I * c1[3]);
      };
      break;
    case DiffOp::DzDzbar:
      comp = [](const auto&, const auto& c2, const auto&) {
        return std::complex<double>(0.25 * (c2[0] + c2[1]), 0.0);
      };
      break;
    case DiffOp::DwDwbar:
      comp = [](const auto&, const auto& c2, const auto&) {
        return std::complex<double>(0.25 * (c2[2] + c2[3]), 0.0);
      };
      break;
    case DiffOp::DzDw:
      comp = [I](const auto& c1, const auto&, const auto&) {
        return 0.25 * (c1[0] - I * c1[1]) * (c1[2] - I * c1[3]);
      };
      break;
    case DiffOp::Mixed4:
      comp = [](const auto&, const auto& c2, const auto&) {
        return std::complex<double>(
            0.0625 * (c2[0] + c2[1]) * (c2[2] + c2[3]), 0.0);
      };
      break;
  }
  return apply_multiplier(f, op_tag(op), comp,
                          op_preserves_realness(op, f.spec.mode));
}

ScalarField axis_derivative(const ScalarField& f, int axis, int order) {
  if (axis < 0 || axis > 3) throw ConfigError("derivative axis out of range");
  if (!f.spec.axis_present(axis)) {
    throw ConfigError("axis x" + std::to_string(axis + 1) +
                      " is suppressed in this grid mode");
  }
  if (order != 1 && order != 2)
    throw ConfigError("derivative order must be 1 or 2");
  Composer comp = [axis, order](const auto& c1, const auto& c2, const auto&) {
    return order == 1 ? c1[std::size_t(axis)]
                      : std::complex<double>(c2[std::size_t(axis)], 0.0);
  };
  char tag[32];
  std::snprintf(tag, sizeof tag, "ax%d-o%d", axis, order);
  return apply_multiplier(f, tag, comp, true);
}

ScalarField dealias_23(const ScalarField& f) {
  const GridSpec g = f.spec;
  Composer comp = [g](const auto&, const auto&, const std::array<int, 4>& js) {
    for (int a = 0; a < 4; ++a) {
      if (!g.axis_present(a)) continue;
      if (3 * std::abs(js[a]) > g.n[a]) return std::complex<double>(0.0, 0.0);
    }
    return std::complex<double>(1.0, 0.0);
  };
  return apply_multiplier(f, "cut23", comp, true);
}

}  // namespace gkflow
