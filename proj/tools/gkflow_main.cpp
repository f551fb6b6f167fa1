#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "gkflow/heatmap.hpp"
#include "gkflow/runner.hpp"
#include "gkflow/scenario.hpp"
#include "gkflow/snapshot.hpp"

namespace {

using gkflow::ConfigError;

// Exit codes: 0 success, 2 failed check or aborted run, 3 positivity cone
// violation, 4 configuration error.
constexpr int kExitCheckFailed = 2;
constexpr int kExitCone = 3;
constexpr int kExitConfig = 4;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  // key -> flag value, applied over the config file in registration order
  std::vector<std::pair<std::string, CLI::Option*>> overrides;
  std::vector<std::string> values;
};

void add_common(CLI::App* cmd, CommonFlags& fl) {
  cmd->add_option("--config", fl.config_path, "key=value config file");
  cmd->add_option("--out-dir", fl.out_dir,
                  "output directory (default $GKFLOW_OUT_DIR, else '.')");

  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"scenario", "flat-stationary | kahler-reduction | generic-potential | "
                   "conformal-background | custom"},
      {"mode", "reduced2d | full4d"},
      {"n1", "grid size along x1"},
      {"n2", "grid size along x2 (full4d)"},
      {"n3", "grid size along x3"},
      {"n4", "grid size along x4 (full4d)"},
      {"period1", "period along x1"},
      {"period2", "period along x2"},
      {"period3", "period along x3"},
      {"period4", "period along x4"},
      {"initial-potential", "initial potential expression or snapshot:<path>"},
      {"hplus", "reference metric on the plus factor"},
      {"hminus", "reference metric on the minus factor"},
      {"g0plus", "initial background plus block ('h' copies hplus)"},
      {"g0minus", "initial background minus block ('h' copies hminus)"},
      {"t-end", "final time"},
      {"snapshot-dt", "snapshot cadence (0: endpoints only)"},
      {"monitor-dt", "monitor cadence (0: every step)"},
      {"sigma-cfl", "CFL safety fraction"},
      {"eps-pos", "positivity floor"},
      {"mub-A", "weight of the torsion term in the composite monitor"},
      {"checks", "comma list of checks, or 'all'"},
      {"seed", "seed for randomized probes"},
  };
  fl.values.resize(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    std::string config_key = keys[i].first;
    for (char& c : config_key) {
      if (c == '-') c = '_';
    }
    CLI::Option* o = cmd->add_option("--" + keys[i].first, fl.values[i],
                                     keys[i].second + " (config key " +
                                         config_key + ")");
    fl.overrides.emplace_back(config_key, o);
  }
}

gkflow::RunConfig load_config(const CommonFlags& fl) {
  gkflow::RunConfig cfg;
  if (!fl.config_path.empty()) cfg = gkflow::parse_config_file(fl.config_path);
  for (std::size_t i = 0; i < fl.overrides.size(); ++i) {
    if (fl.overrides[i].second->count() > 0) {
      gkflow::apply_config_key(cfg, fl.overrides[i].first, fl.values[i], 0);
    }
  }
  gkflow::validate_config(cfg);
  return cfg;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": cannot parse number '" + item +
                        "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void print_report(const gkflow::RunReport& rep, const std::string& out_dir) {
  std::cout << rep.text();
  std::cout << "output directory: " << out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for the scalar reduction of pluriclosed "
               "flow on split-tangent generalized Kahler surfaces"};
  app.require_subcommand(1);

  CLI::App* cmd_run = app.add_subcommand("run", "evolve a scenario and run "
                                                "the configured checks");
  CommonFlags fl_run;
  add_common(cmd_run, fl_run);

  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "fixed-step refinement study of the evolution identities");
  CommonFlags fl_verify;
  add_common(cmd_verify, fl_verify);

  CLI::App* cmd_heat = app.add_subcommand(
      "heat", "couple the scalar heat equation to the evolving metric");
  CommonFlags fl_heat;
  add_common(cmd_heat, fl_heat);
  std::string u0_spec;
  cmd_heat->add_option("--u0", u0_spec,
                       "initial heat profile (default sin(x1)+sin(x3))");

  CLI::App* cmd_tau = app.add_subcommand(
      "tau-star", "largest time keeping the class pairings positive");
  std::string tau_a, tau_pi;
  cmd_tau->add_option("--a", tau_a, "a_plus,a_minus")->required();
  cmd_tau->add_option("--pi", tau_pi, "pi_plus,pi_minus")->required();

  CLI::App* cmd_map = app.add_subcommand(
      "emit-heatmap", "render a stored field as an 8-bit graymap");
  std::string map_snapshot, map_run_dir, map_field, map_out;
  cmd_map->add_option("--snapshot", map_snapshot, "field file to render");
  cmd_map->add_option("--run-dir", map_run_dir,
                      "run output directory holding <field>.gkf1");
  cmd_map->add_option("--field", map_field,
                      "field stem inside --run-dir, e.g. final_gplus");
  cmd_map->add_option("--out", map_out, "output .pgm path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      const gkflow::RunConfig cfg = load_config(fl_run);
      const std::string dir = gkflow::resolve_out_dir(fl_run.out_dir);
      const gkflow::RunReport rep = gkflow::run_scenario(cfg, dir);
      print_report(rep, dir);
      return rep.exit_code;
    }
    if (cmd_verify->parsed()) {
      const gkflow::RunConfig cfg = load_config(fl_verify);
      const std::string dir = gkflow::resolve_out_dir(fl_verify.out_dir);
      const gkflow::RunReport rep = gkflow::verify_scenario(cfg, dir);
      print_report(rep, dir);
      return rep.exit_code;
    }
    if (cmd_heat->parsed()) {
      const gkflow::RunConfig cfg = load_config(fl_heat);
      const std::string dir = gkflow::resolve_out_dir(fl_heat.out_dir);
      const gkflow::RunReport rep = gkflow::heat_scenario(cfg, u0_spec, dir);
      print_report(rep, dir);
      return rep.exit_code;
    }
    if (cmd_tau->parsed()) {
      const std::vector<double> a = parse_list(tau_a, "--a");
      const std::vector<double> pi = parse_list(tau_pi, "--pi");
      if (a.size() != 2 || pi.size() != 2) {
        throw ConfigError("tau-star needs two comma-separated values per flag");
      }
      gkflow::ClassData c;
      c.a_plus = a[0];
      c.a_minus = a[1];
      c.pi_plus = pi[0];
      c.pi_minus = pi[1];
      const double tau = gkflow::tau_star(c);
      if (std::isfinite(tau)) {
        std::printf("%.17g\n", tau);
      } else {
        std::printf("inf\n");
      }
      return 0;
    }
    if (cmd_map->parsed()) {
      std::string path;
      if (!map_snapshot.empty()) {
        path = map_snapshot;
      } else if (!map_run_dir.empty() && !map_field.empty()) {
        path = map_run_dir + "/" + map_field + ".gkf1";
      } else {
        throw ConfigError(
            "emit-heatmap needs --snapshot or both --run-dir and --field");
      }
      const gkflow::ScalarField f = gkflow::read_snapshot(path);
      const auto [lo, hi] = gkflow::write_heatmap(f, map_out);
      std::printf("wrote %s (%d x %d), range [%.17g, %.17g]\n",
                  map_out.c_str(), f.spec.n[2], f.spec.n[0], lo, hi);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gkflow::ConeViolation& e) {
    std::cerr << "cone violation: " << e.what() << "\n";
    return kExitCone;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitConfig;
}
