#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "qheat/scenario.hpp"

using namespace qheat;

namespace {

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::map<std::string, std::string>& sugar) {
  Json j;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "config error: cannot open " << config_path << "\n";
        return 4;
      }
      j = Json::parse(in, nullptr, true, true);
    } else {
      j = Json::object();
    }
    // sugar flags map onto config paths
    for (const auto& [path, value] : sugar) apply_override(j, path + "=" + value);
    for (const auto& kv : overrides) apply_override(j, kv);

    ScenarioConfig cfg = parse_config(j);
    auto outcome = run_scenario(cfg, true);
    for (const auto& a : outcome.assertions) {
      if (!a.pass) {
        std::cerr << "assertion failed: " << a.name << " value=" << fmt_full(a.value)
                  << " threshold=" << fmt_full(a.threshold)
                  << (a.where.empty() ? "" : " at " + a.where) << "\n";
        break;  // first failing assertion carries the coordinates
      }
    }
    return outcome.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch front-end for the degenerate quasilinear heat laboratory"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute a scenario and write its artifacts");
  std::string config_path;
  std::vector<std::string> overrides;
  run->add_option("--config", config_path, "scenario config JSON");
  run->add_option("--set", overrides, "dotted-path override, e.g. solver.t_end=0.25");

  // common flags, mapped 1:1 onto config paths
  std::map<std::string, std::string> sugar;
  auto sugar_opt = [&](const char* flag, const char* path, const char* help) {
    run->add_option_function<std::string>(
        flag, [&sugar, path](const std::string& v) { sugar[path] = v; }, help);
  };
  sugar_opt("--scenario", "scenario", "scenario kind");
  sugar_opt("--case", "case.kind", "bounded_interval | whole_line | half_line");
  sugar_opt("--gamma", "case.gamma", "growth exponent in [0,2]");
  sugar_opt("--kappa", "case.kappa", "quadratic growth cap");
  sugar_opt("--K", "case.K", "envelope constant >= 1");
  sugar_opt("--L", "case.L", "interval length");
  sugar_opt("--u0", "u0.family", "initial-condition family");
  sugar_opt("--t-end", "solver.t_end", "integration horizon");
  sugar_opt("--dy", "grid.dy", "grid spacing");
  sugar_opt("--scheme", "solver.scheme", "semi_implicit_lagged | explicit_cfl");
  sugar_opt("--seed", "seed", "deterministic seed");
  sugar_opt("--lambda", "blowup.lambda", "weight exponent of the divergence construction");
  sugar_opt("--out", "output_dir", "output directory");

  auto* ls = app.add_subcommand("list-scenarios", "print scenario kinds and data families");

  // normalize --case line / half to the full names
  CLI11_PARSE(app, argc, argv);

  if (ls->parsed()) {
    std::cout << scenario_catalog_text();
    return 0;
  }
  if (sugar.count("case.kind")) {
    auto& v = sugar["case.kind"];
    if (v == "line") v = "whole_line";
    if (v == "half" || v == "halfline") v = "half_line";
    if (v == "interval" || v == "bounded") v = "bounded_interval";
  }
  if (const char* root = std::getenv("QHEAT_OUT_ROOT"); root && !sugar.count("output_dir")) {
    sugar["output_dir"] = std::string(root) + "/run";
  }
  return cmd_run(config_path, overrides, sugar);
}
