#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "qheat/scenario.hpp"

using namespace qheat;

TEST_CASE("config parses, serializes and round-trips to identity") {
  Json j = Json::parse(R"({
    "spec": 1,
    "scenario": "solve",
    "seed": 7,
    "output_dir": "dummy",
    "case": {"kind": "whole_line", "gamma": 2.0, "kappa": 1.0, "K": 1.0},
    "u0": {"family": "quadratic_plus_one"},
    "grid": {"y_min": -6.0, "y_max": 6.0, "dy": 0.03125},
    "solver": {"t_end": 0.25}
  })");
  auto cfg = parse_config(j);
  CHECK(cfg.scenario == "solve");
  CHECK(cfg.domain.kind == IntervalKind::WholeLine);
  CHECK(cfg.solver.t_end == 0.25);
  const Json norm = serialize_config(cfg);
  auto cfg2 = parse_config(norm);
  CHECK(serialize_config(cfg2).dump() == norm.dump());
}

TEST_CASE("unknown keys are rejected at every level") {
  Json j = Json::parse(R"({"spec": 1, "scenario": "solve", "typo_key": 1})");
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  Json j2 = Json::parse(R"({"spec": 1, "solver": {"dt_ini": 0.1}})");
  CHECK_THROWS_AS(parse_config(j2), ConfigError);
  Json j3 = Json::parse(R"({"spec": 1, "case": {"kind": "whole_line", "radius": 2}})");
  CHECK_THROWS_AS(parse_config(j3), ConfigError);
  Json j4 = Json::parse(R"({"spec": 2})");
  CHECK_THROWS_AS(parse_config(j4), ConfigError);
}

TEST_CASE("dotted overrides merge into the config tree") {
  Json j = Json::object();
  apply_override(j, "case.kappa=2.5");
  apply_override(j, "solver.scheme=explicit_cfl");
  apply_override(j, "scenario=solve");
  CHECK(j["case"]["kappa"] == 2.5);
  CHECK(j["solver"]["scheme"] == "explicit_cfl");
  auto cfg = parse_config(j);
  CHECK(cfg.domain.kappa == 2.5);
  CHECK(cfg.solver.scheme == Scheme::ExplicitCfl);
}

TEST_CASE("catalog names are accepted by the runner") {
  // every named family must construct; lightweight enumeration self-test
  for (const auto& fam : ic_catalog()) {
    ScenarioConfig cfg;
    cfg.u0_family = fam.name;
    if (fam.name == "quadratic" || fam.name == "quadratic_plus_bump") {
      cfg.domain = DomainCase::half_line(2.0, 1.0, 1.0);
    } else if (fam.name == "bump_on_interval") {
      cfg.domain = DomainCase::bounded(4.0, 4.0, 1.0);
      cfg.u0_params = {{"a", 0.5}, {"b", 3.5}, {"amp", 1.0}};
    } else {
      cfg.domain = DomainCase::whole_line(fam.name == "power_law" ? 1.0 : 2.0, 1.0, 1.0);
    }
    // construction alone (no solve): the family resolves to a callable
    ScenarioConfig probe = cfg;
    CHECK_NOTHROW([&] {
      if (probe.u0_family == "quadratic_plus_bump") {
        // built through the divergence construction; just verify feasibility
        auto bc = build_theta_lambda(probe.domain.kappa, 0.1, std::log(16.0));
        CHECK(bc.theta(-1.0) >= 0.0);
      } else {
        auto ic = make_named_ic(probe.u0_family, probe.u0_params, probe.domain);
        CHECK(ic.fn(1.0) >= 0.0);
      }
    }());
  }
  CHECK(scenario_catalog_text().find("blowup") != std::string::npos);
}

TEST_CASE("solve scenario runs end to end and reruns byte-identically") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qheat_scenario_test";
  fs::remove_all(dir);

  ScenarioConfig cfg;
  cfg.scenario = "solve";
  cfg.domain = DomainCase::whole_line(2.0, 1.0, 1.0);
  cfg.u0_family = "quadratic_plus_one";
  cfg.grid = {-6.0, 6.0, 1.0 / 32.0};
  cfg.solver.t_end = 0.25;
  cfg.solver.dt_initial = 5e-4;
  cfg.output_dir = (dir / "a").string();
  auto out1 = run_scenario(cfg, true);
  CHECK(out1.exit_code == 0);
  REQUIRE(fs::exists(dir / "a" / "snapshots.csv"));
  REQUIRE(fs::exists(dir / "a" / "diagnostics.csv"));
  REQUIRE(fs::exists(dir / "a" / "report.json"));
  REQUIRE(fs::exists(dir / "a" / "manifest.json"));

  cfg.output_dir = (dir / "b").string();
  auto out2 = run_scenario(cfg, true);
  CHECK(out2.exit_code == 0);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  CHECK(slurp(dir / "a" / "snapshots.csv") == slurp(dir / "b" / "snapshots.csv"));
  CHECK(slurp(dir / "a" / "diagnostics.csv") == slurp(dir / "b" / "diagnostics.csv"));
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));

  // manifests agree except for the timestamp field
  auto ma = Json::parse(slurp(dir / "a" / "manifest.json"));
  auto mb = Json::parse(slurp(dir / "b" / "manifest.json"));
  ma.erase("created_utc");
  mb.erase("created_utc");
  ma["config"].erase("output_dir");
  mb["config"].erase("output_dir");
  ma.erase("config_sha1");
  mb.erase("config_sha1");
  CHECK(ma.dump() == mb.dump());
  fs::remove_all(dir);
}

TEST_CASE("table-backed data loads, interpolates and drives a run") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qheat_table_test";
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "u0.csv");
    csv << "x,u\n";
    for (int i = 0; i <= 400; ++i) {
      const double x = -20.0 + 40.0 * i / 400.0;
      csv << x << "," << x * x + 1.0 << "\n";
    }
  }
  auto ic = make_table_ic((dir / "u0.csv").string());
  CHECK(ic.fn(0.05) == doctest::Approx(0.05 * 0.05 + 1.0).epsilon(1e-3));
  CHECK(ic.fn(500.0) == 0.0);

  Json j = Json::object();
  apply_override(j, "scenario=solve");
  apply_override(j, "u0.family=table");
  apply_override(j, "u0.file=" + (dir / "u0.csv").string());
  apply_override(j, "grid.y_min=-2.5");
  apply_override(j, "grid.y_max=2.5");
  apply_override(j, "grid.dy=0.03125");
  apply_override(j, "solver.t_end=0.2");
  apply_override(j, "output_dir=" + (dir / "run").string());
  auto cfg = parse_config(j);
  auto out = run_scenario(cfg, false);
  CHECK(out.exit_code == 0);
  fs::remove_all(dir);
}

TEST_CASE("remaining scenario kinds drive end to end (coarse)") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qheat_kinds_test";
  fs::remove_all(dir);

  SUBCASE("fbsde") {
    ScenarioConfig cfg;
    cfg.scenario = "fbsde";
    cfg.grid = {-7.0, 7.0, 1.0 / 32.0};
    cfg.solver.dt_initial = 5e-4;
    cfg.fbsde.n_paths = 4000;
    cfg.fbsde.dt_sde = 1e-3;
    cfg.fbsde.dump_terminals = true;
    cfg.output_dir = (dir / "fbsde").string();
    auto out = run_scenario(cfg, true);
    CHECK(out.exit_code == 0);
    REQUIRE(fs::exists(dir / "fbsde" / "terminals.bin"));
    CHECK(fs::file_size(dir / "fbsde" / "terminals.bin") == 8u + 8u * 4000u);
  }
  SUBCASE("convergence study") {
    ScenarioConfig cfg;
    cfg.scenario = "convergence_study";
    cfg.grid = {-6.0, 6.0, 1.0 / 16.0};
    cfg.solver.dt_initial = 2.0 * cfg.grid.dy * cfg.grid.dy;
    cfg.solver.t_end = 0.25;
    cfg.convergence.levels = 2;
    cfg.output_dir = (dir / "conv").string();
    auto out = run_scenario(cfg, true);
    CHECK(out.exit_code == 0);
  }
  SUBCASE("cut paste") {
    ScenarioConfig cfg;
    cfg.scenario = "cut_paste";
    cfg.domain = DomainCase::bounded(6.0, 4.0, 1.0);
    cfg.grid.dy = 1.0 / 32.0;
    cfg.output_dir = (dir / "cut").string();
    auto out = run_scenario(cfg, true);
    CHECK(out.exit_code == 0);
  }
  SUBCASE("blowup") {
    ScenarioConfig cfg;
    cfg.scenario = "blowup";
    cfg.domain = DomainCase::half_line(2.0, 1.0, 1.0);
    cfg.grid.dy = 1.0 / 48.0;
    cfg.blowup.n_snapshots = 60;
    cfg.blowup.run_control = false;
    cfg.output_dir = (dir / "blow").string();
    auto out = run_scenario(cfg, true);
    // control disabled: remaining assertions must pass
    CHECK(out.exit_code == 0);
  }
  fs::remove_all(dir);
}
