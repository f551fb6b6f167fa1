#include "gkflow/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "gkflow/errors.hpp"

namespace gkflow {

std::pair<double, double> write_heatmap(const ScalarField& f,
                                        const std::string& path) {
  if (f.spec.mode != GridMode::Reduced2d) {
    throw ConfigError("heatmap output requires a reduced2d field");
  }
  require_finite(f, "heatmap input");

  const std::size_t height = f.spec.n[0];
  const std::size_t width = f.spec.n[2];
  std::vector<double> vals(f.size());
  if (f.is_real()) {
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = f.re[i];
  } else {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      vals[i] = std::hypot(f.re[i], f.im[i]);
    }
  }

  const auto [lo_it, hi_it] = std::minmax_element(vals.begin(), vals.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double span = hi - lo;

  std::vector<unsigned char> bytes(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (span <= 0.0) {
      bytes[i] = 128;
    } else {
      const double u = 255.0 * (vals[i] - lo) / span;
      bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(u, 0.0, 255.0)));
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open heatmap file for writing: " + path);
  char header[64];
  std::snprintf(header, sizeof(header), "P5\n%zu %zu\n255\n", width, height);
  out << header;
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing heatmap file: " + path);
  return {lo, hi};
}

}  // namespace gkflow
