#include "gkflow/snapshot.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace gkflow {

namespace {

constexpr char kMagic[4] = {'G', 'K', 'F', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace

void write_snapshot(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open snapshot for writing: " + path);
  os.write(kMagic, 4);
  put_u32(os, static_cast<std::uint32_t>(f.spec.mode));
  for (int a = 0; a < 4; ++a)
    if (f.spec.axis_present(a)) put_u32(os, std::uint32_t(f.spec.n[a]));
  for (int a = 0; a < 4; ++a)
    if (f.spec.axis_present(a)) put_f64(os, f.spec.period[a]);
  if (f.is_real()) {
    for (double v : f.re) put_f64(os, v);
  } else {
    for (std::size_t i = 0; i < f.size(); ++i) {
      put_f64(os, f.re[i]);
      put_f64(os, f.im[i]);
    }
  }
  if (!os) throw ConfigError("short write on snapshot: " + path);
}

ScalarField read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open snapshot: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw ConfigError("bad snapshot magic in " + path);
  const std::uint32_t mode = get_u32(is);
  if (mode > 1) throw ConfigError("bad snapshot mode flag in " + path);
  GridSpec g;
  g.mode = static_cast<GridMode>(mode);
  g.n = {1, 1, 1, 1};
  for (int a = 0; a < 4; ++a)
    if (g.axis_present(a)) g.n[a] = int(get_u32(is));
  for (int a = 0; a < 4; ++a)
    if (g.axis_present(a)) g.period[a] = get_f64(is);
  if (!is) throw ConfigError("truncated snapshot header in " + path);
  g.validate();

  const std::size_t ns = g.samples();
  std::vector<double> payload;
  payload.reserve(2 * ns);
  while (true) {
    double v = get_f64(is);
    if (!is) break;
    payload.push_back(v);
    if (payload.size() > 2 * ns) break;
  }
  if (payload.size() == ns) {
    ScalarField f = ScalarField::zeros(g, FieldKind::Real);
    f.re = std::move(payload);
    return f;
  }
  if (payload.size() == 2 * ns) {
    ScalarField f = ScalarField::zeros(g, FieldKind::Complex);
    for (std::size_t i = 0; i < ns; ++i) {
      f.re[i] = payload[2 * i];
      f.im[i] = payload[2 * i + 1];
    }
    return f;
  }
  throw ConfigError("snapshot payload length mismatch in " + path);
}

}  // namespace gkflow
