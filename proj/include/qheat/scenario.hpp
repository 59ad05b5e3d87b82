#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qheat/experiments.hpp"
#include "qheat/io.hpp"

namespace qheat {

/// Malformed or inconsistent scenario input (exit code 4 at the CLI).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FbsdeConfig {
  long n_paths = 100000;
  double dt_sde = 2.5e-4;
  double x0 = 1.0;
  double T = 0.5;
  double t_check = 0.25;
  int n_bins = 8;
  bool dump_terminals = false;
};

struct ConvergenceConfig {
  int levels = 3;
};

struct ScenarioConfig {
  int spec = 1;
  std::string scenario = "solve";  // solve | blowup | cut_paste | fbsde | convergence_study
  uint64_t seed = 1;
  std::string output_dir = "out";

  DomainCase domain = DomainCase::whole_line(2.0, 1.0, 1.0);
  std::string u0_family = "quadratic_plus_one";
  std::map<std::string, double> u0_params;
  std::string u0_file;  // sampled-table family only
  GridSpec grid{-8.0, 8.0, 1.0 / 128.0};
  SolverConfig solver;

  BlowupExperimentConfig blowup;  // kappa mirrored from domain at run time
  CutPasteConfig cut_paste;
  FbsdeConfig fbsde;
  ConvergenceConfig convergence;
};

/// Strict parse: unknown keys anywhere are a ConfigError. serialize() emits
/// the normalized form; parse(serialize(c)) == c.
ScenarioConfig parse_config(const Json& j);
Json serialize_config(const ScenarioConfig& c);

/// Dotted-path override, e.g. "solver.t_end=0.25" or "case.kappa=2".
void apply_override(Json& j, const std::string& keyval);

struct Assertion {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string where;  // node/time coordinates of the first violation
};

struct ScenarioOutcome {
  int exit_code = 0;  // 0 ok, 2 assertion failed, 3 solver failure, 4 config error
  std::vector<Assertion> assertions;
  Json report;
};

/// Execute the scenario; when write_outputs is set, emit manifest.json,
/// report.json and the CSV artifacts into output_dir.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg, bool write_outputs = true);

std::string scenario_catalog_text();

}  // namespace qheat
