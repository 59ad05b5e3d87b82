#include <cmath>

#include "doctest.h"
#include "qheat/experiments.hpp"

using namespace qheat;

TEST_CASE("cut and paste: vanishing right bump makes the union equal the left run") {
  CutPasteConfig cfg;
  cfg.L = 4.0;
  cfg.gap = 1.0;
  cfg.dy = 1.0 / 32.0;
  cfg.t_end = 0.2;
  cfg.refine_levels = 1;
  auto c = DomainCase::bounded(cfg.L, cfg.kappa, 1.0);
  const double w = 0.5 * (cfg.L - cfg.gap);
  auto left = make_named_ic("bump_on_interval", {{"a", 0.0}, {"b", w}, {"amp", 0.5}}, c);
  InitialCondition right;
  right.family = "bump_on_interval";
  right.params = {{"a", w + cfg.gap}, {"b", cfg.L}, {"amp", 0.0}};
  right.fn = [](double) { return 0.0; };
  auto rep = run_cut_paste_experiment(left, right, cfg);
  CHECK(rep.finest <= 1e-14);
}

TEST_CASE("cut and paste: disjoint bumps evolve independently, shrinking under refinement") {
  CutPasteConfig cfg;
  cfg.L = 6.0;
  cfg.gap = 1.0;
  cfg.amp_left = 0.5;
  cfg.amp_right = 0.5;  // identical bump translated
  cfg.dy = 1.0 / 32.0;
  cfg.t_end = 0.2;
  cfg.refine_levels = 2;
  auto rep = run_cut_paste_experiment(cfg);
  CHECK(rep.left_admissible);
  CHECK(rep.right_admissible);
  CHECK(rep.finest <= 1e-5);
  CHECK(rep.shrinking);
}

TEST_CASE("cut and paste: overlapping supports rejected") {
  CutPasteConfig cfg;
  cfg.L = 4.0;
  auto c = DomainCase::bounded(cfg.L, cfg.kappa, 1.0);
  auto left = make_named_ic("bump_on_interval", {{"a", 0.0}, {"b", 2.5}, {"amp", 0.5}}, c);
  auto right = make_named_ic("bump_on_interval", {{"a", 2.0}, {"b", 4.0}, {"amp", 0.5}}, c);
  CHECK_THROWS_AS(run_cut_paste_experiment(left, right, cfg), std::invalid_argument);
}

TEST_CASE("early blow-up experiment at a coarse grid (smoke)") {
  BlowupExperimentConfig cfg;
  cfg.kappa = 1.0;
  cfg.lambda = 0.1;
  cfg.dy = 1.0 / 48.0;
  cfg.n_snapshots = 80;
  cfg.run_control = false;
  auto rep = run_blowup_experiment(cfg);
  CHECK(rep.status == SolveStatus::BlowupDetected);
  CHECK(rep.measured_t_star < 1.0);
  CHECK(rep.predicted_bound <= 0.5);
  CHECK(rep.b_grid == doctest::Approx(rep.b_value).epsilon(0.01));
  CHECK(rep.j_inequality_ok);
  CHECK(rep.exp_moment_ok);
}

TEST_CASE("smaller bump blows up later (3-point ladder)") {
  // shrink the envelope by raising the target less; emulate by scaling lambda?
  // the monotone knob here is the achieved b: lower b -> later bound and
  // later measured divergence
  std::vector<double> targets = {std::log(16.0) + 1.0, std::log(16.0) + 0.5, std::log(16.0)};
  double prev = -1.0;
  for (double tb : targets) {
    BlowupExperimentConfig cfg;
    cfg.kappa = 1.0;
    cfg.lambda = 0.1;
    cfg.target_b = tb;
    cfg.dy = 1.0 / 32.0;
    cfg.n_snapshots = 60;
    cfg.run_control = false;
    auto rep = run_blowup_experiment(cfg);
    REQUIRE(rep.status == SolveStatus::BlowupDetected);
    CHECK(rep.measured_t_star >= prev);
    prev = rep.measured_t_star;
  }
}
