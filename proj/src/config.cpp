#include "gkflow/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gkflow {

namespace {

[[noreturn]] void key_error(const std::string& key, int line,
                            const std::string& msg) {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ": ";
  os << "key '" << key << "': " << msg;
  throw ConfigError(os.str());
}

double parse_double(const std::string& key, const std::string& v, int line) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty())
    key_error(key, line, "expected a number, got '" + v + "'");
  return x;
}

long parse_long(const std::string& key, const std::string& v, int line) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty())
    key_error(key, line, "expected an integer, got '" + v + "'");
  return x;
}

int parse_axis_size(const std::string& key, const std::string& v, int line) {
  const long x = parse_long(key, v, line);
  if (x < 1 || x > 1 << 20) key_error(key, line, "size out of range");
  return static_cast<int>(x);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    std::size_t comma = v.find(',', start);
    if (comma == std::string::npos) comma = v.size();
    const std::string item = trim(v.substr(start, comma - start));
    if (!item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::FlatStationary: return "flat-stationary";
    case Scenario::KahlerReduction: return "kahler-reduction";
    case Scenario::GenericPotential: return "generic-potential";
    case Scenario::ConformalBackground: return "conformal-background";
    case Scenario::Custom: return "custom";
  }
  throw ConfigError("unhandled scenario value");
}

Scenario scenario_from(const std::string& name) {
  if (name == "flat-stationary") return Scenario::FlatStationary;
  if (name == "kahler-reduction") return Scenario::KahlerReduction;
  if (name == "generic-potential") return Scenario::GenericPotential;
  if (name == "conformal-background") return Scenario::ConformalBackground;
  if (name == "custom") return Scenario::Custom;
  throw ConfigError("unknown scenario '" + name + "'");
}

const std::vector<std::string>& known_check_names() {
  static const std::vector<std::string> names = {
      "curvature-identity",      "log-det-ratio",
      "potential-rate",          "torsion-potential",
      "torsion-potential-norm",  "trace",
      "heat-gradient",           "monitors",
      "all",
  };
  return names;
}

void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value, int line) {
  if (key == "scenario") {
    try {
      cfg.scenario = scenario_from(value);
    } catch (const ConfigError& e) {
      key_error(key, line, e.what());
    }
  } else if (key == "mode") {
    if (value == "reduced2d")
      cfg.grid.mode = GridMode::Reduced2d;
    else if (value == "full4d")
      cfg.grid.mode = GridMode::Full4d;
    else
      key_error(key, line, "expected reduced2d or full4d");
  } else if (key == "n1") {
    cfg.grid.n[0] = parse_axis_size(key, value, line);
  } else if (key == "n2") {
    cfg.grid.n[1] = parse_axis_size(key, value, line);
  } else if (key == "n3") {
    cfg.grid.n[2] = parse_axis_size(key, value, line);
  } else if (key == "n4") {
    cfg.grid.n[3] = parse_axis_size(key, value, line);
  } else if (key == "period1") {
    cfg.grid.period[0] = parse_double(key, value, line);
  } else if (key == "period2") {
    cfg.grid.period[1] = parse_double(key, value, line);
  } else if (key == "period3") {
    cfg.grid.period[2] = parse_double(key, value, line);
  } else if (key == "period4") {
    cfg.grid.period[3] = parse_double(key, value, line);
  } else if (key == "initial_potential") {
    cfg.initial_potential = value;
  } else if (key == "hplus") {
    cfg.hplus = value;
  } else if (key == "hminus") {
    cfg.hminus = value;
  } else if (key == "g0plus") {
    cfg.g0plus = value;
  } else if (key == "g0minus") {
    cfg.g0minus = value;
  } else if (key == "t_end") {
    cfg.t_end = parse_double(key, value, line);
  } else if (key == "snapshot_dt") {
    cfg.snapshot_dt = parse_double(key, value, line);
  } else if (key == "monitor_dt") {
    cfg.monitor_dt = parse_double(key, value, line);
  } else if (key == "sigma_cfl") {
    cfg.sigma_cfl = parse_double(key, value, line);
  } else if (key == "eps_pos") {
    cfg.eps_pos = parse_double(key, value, line);
  } else if (key == "mub_A") {
    cfg.mub_A = parse_double(key, value, line);
  } else if (key == "checks") {
    cfg.checks = split_list(value);
  } else if (key == "seed") {
    cfg.seed = parse_long(key, value, line);
  } else {
    key_error(key, line, "unknown key");
  }
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "line " << line << ": expected key=value, got '" << s << "'";
      throw ConfigError(os.str());
    }
    apply_config_key(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line);
  }
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config_text(body.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "scenario=" << scenario_name(cfg.scenario) << "\n";
  os << "mode=" << (cfg.grid.mode == GridMode::Reduced2d ? "reduced2d" : "full4d")
     << "\n";
  os << "n1=" << cfg.grid.n[0] << "\n";
  os << "n2=" << cfg.grid.n[1] << "\n";
  os << "n3=" << cfg.grid.n[2] << "\n";
  os << "n4=" << cfg.grid.n[3] << "\n";
  for (int a = 0; a < 4; ++a)
    os << "period" << a + 1 << "=" << fmt_double(cfg.grid.period[a]) << "\n";
  os << "initial_potential=" << cfg.initial_potential << "\n";
  os << "hplus=" << cfg.hplus << "\n";
  os << "hminus=" << cfg.hminus << "\n";
  os << "g0plus=" << cfg.g0plus << "\n";
  os << "g0minus=" << cfg.g0minus << "\n";
  os << "t_end=" << fmt_double(cfg.t_end) << "\n";
  os << "snapshot_dt=" << fmt_double(cfg.snapshot_dt) << "\n";
  os << "monitor_dt=" << fmt_double(cfg.monitor_dt) << "\n";
  os << "sigma_cfl=" << fmt_double(cfg.sigma_cfl) << "\n";
  os << "eps_pos=" << fmt_double(cfg.eps_pos) << "\n";
  os << "mub_A=" << fmt_double(cfg.mub_A) << "\n";
  os << "checks=";
  for (std::size_t i = 0; i < cfg.checks.size(); ++i) {
    if (i) os << ",";
    os << cfg.checks[i];
  }
  os << "\n";
  os << "seed=" << cfg.seed << "\n";
  return os.str();
}

void validate_config(const RunConfig& cfg) {
  cfg.grid.validate();
  if (!(cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(cfg.sigma_cfl > 0.0)) throw ConfigError("sigma_cfl must be positive");
  if (!(cfg.eps_pos > 0.0)) throw ConfigError("eps_pos must be positive");
  if (cfg.mub_A < 0.0) throw ConfigError("mub_A must be nonnegative");
  if (cfg.snapshot_dt < 0.0) throw ConfigError("snapshot_dt must be nonnegative");
  if (cfg.monitor_dt < 0.0) throw ConfigError("monitor_dt must be nonnegative");
  const auto& known = known_check_names();
  for (const std::string& c : cfg.checks) {
    if (std::find(known.begin(), known.end(), c) == known.end())
      throw ConfigError("unknown check name '" + c + "'");
  }
}

}  // namespace gkflow
