#include <cmath>

#include "doctest.h"
#include "qheat/fbsde.hpp"

using namespace qheat;

namespace {

// hand-built trajectory with field u(t, x) given by a callable
SolveResult synthetic_trajectory(const Transform& T, const GridSpec& g, int n_snaps, double t_end,
                                 double (*u_of)(double, double)) {
  SolveResult res;
  const Field y = g.y_grid();
  const Field x = T.zeta(y);
  const Field dz = T.dzeta(y);
  for (int k = 0; k < n_snaps; ++k) {
    const double t = t_end * k / (n_snaps - 1);
    FieldPair f;
    f.t = t;
    f.grid = g;
    f.v.resize(x.size());
    for (Index i = 0; i < x.size(); ++i) f.v[i] = u_of(t, x[i]) / (dz[i] * dz[i]);
    res.v_sup_seen = std::max(res.v_sup_seen, f.v.maxCoeff());
    res.trajectory.push_back(std::move(f));
  }
  res.status = SolveStatus::Completed;
  res.t_stop = t_end;
  return res;
}

}  // namespace

TEST_CASE("constant field: driftless paths with variance c T") {
  auto c = DomainCase::whole_line(2.0, 1.0);
  auto T = make_transform(c, {-6.0, 6.0});
  GridSpec g{-6.0, 6.0, 1.0 / 32.0};
  auto traj = synthetic_trajectory(T, g, 5, 0.5, +[](double, double) { return 2.5; });

  auto e = simulate_paths(traj, T, 0.0, 0.5, 20000, 1e-3, 42);
  REQUIRE(e.valid);
  CHECK(e.n_exited == 0);
  const double var = variance_of(e.x_at.back());
  const double se_var = var * std::sqrt(2.0 / (e.n_paths - 1));
  CHECK(std::abs(var - 2.5 * 0.5) <= 3.0 * se_var);
  // terminal values all equal the constant field
  CHECK(mean_of(e.terminal_values) == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("zero data: every terminal value vanishes") {
  auto c = DomainCase::whole_line(2.0, 1.0);
  auto T = make_transform(c, {-5.0, 5.0});
  GridSpec g{-5.0, 5.0, 1.0 / 16.0};
  auto traj = synthetic_trajectory(T, g, 3, 0.5, +[](double, double) { return 0.0; });
  auto e = simulate_paths(traj, T, 0.3, 0.5, 500, 1e-3, 7);
  REQUIRE(e.valid);
  for (double tv : e.terminal_values) CHECK(tv == 0.0);
}

TEST_CASE("identical seeds reproduce terminal values bit for bit") {
  auto c = DomainCase::whole_line(2.0, 1.0);
  auto T = make_transform(c, {-6.0, 6.0});
  GridSpec g{-6.0, 6.0, 1.0 / 32.0};
  auto traj =
      synthetic_trajectory(T, g, 5, 0.5, +[](double t, double x) { return (x * x + 1.0) / (1.0 - t); });
  auto e1 = simulate_paths(traj, T, 1.0, 0.5, 2000, 1e-3, 99);
  auto e2 = simulate_paths(traj, T, 1.0, 0.5, 2000, 1e-3, 99);
  REQUIRE(e1.terminal_values.size() == e2.terminal_values.size());
  for (size_t i = 0; i < e1.terminal_values.size(); ++i)
    CHECK(e1.terminal_values[i] == e2.terminal_values[i]);
  auto e3 = simulate_paths(traj, T, 1.0, 0.5, 2000, 1e-3, 100);
  CHECK(e3.terminal_values != e1.terminal_values);
}

TEST_CASE("decoupling against the exact quadratic-rate field") {
  auto c = DomainCase::whole_line(2.0, 1.0);
  auto T = make_transform(c, {-7.0, 7.0});
  GridSpec g{-7.0, 7.0, 1.0 / 32.0};
  auto traj =
      synthetic_trajectory(T, g, 65, 0.5, +[](double t, double x) { return (x * x + 1.0) / (1.0 - t); });
  FieldInterpolator interp(traj, T);

  auto e = simulate_paths(interp, 1.0, 0.5, 30000, 2.5e-4, 4242);
  REQUIRE(e.valid);

  SUBCASE("the path-ensemble mean reproduces u(T, x0)") {
    const double mean = mean_of(e.terminal_values);
    const double se = std::sqrt(variance_of(e.terminal_values) / e.n_paths);
    CHECK(std::abs(mean - 4.0) <= 3.0 * se);
  }
  SUBCASE("conditioning at the terminal time gives exactly zero residual") {
    auto rep = check_decoupling(e, interp, 0.5, 8);
    REQUIRE(rep.conclusive);
    CHECK(rep.max_std_residual == doctest::Approx(0.0));
  }
  SUBCASE("conditioning midway keeps standardized residuals within 3") {
    auto rep = check_decoupling(e, interp, 0.25, 8);
    REQUIRE(rep.conclusive);
    CHECK(rep.max_std_residual <= 3.0);
  }
  SUBCASE("the field along paths is a martingale within 3 standard errors") {
    auto rep = martingale_check(e, interp);
    CHECK(rep.max_std_drift <= 3.0);
    CHECK(rep.y0 == doctest::Approx(4.0).epsilon(1e-3));
  }
  SUBCASE("terminal variance matches the integrated field estimate") {
    const double var = variance_of(e.x_at.back());
    auto mart = martingale_check(e, interp);
    // trapezoid of mean Y over the record grid
    double integral = 0.0;
    for (size_t r = 0; r + 1 < mart.times.size(); ++r)
      integral += 0.5 * (mart.mean[r] + mart.mean[r + 1]) * (mart.times[r + 1] - mart.times[r]);
    const double se_var = var * std::sqrt(2.0 / (e.n_paths - 1));
    double se_int = 0.0;
    for (double s : mart.se) se_int = std::max(se_int, s);
    se_int *= e.T;
    CHECK(std::abs(var - integral) <= 3.0 * (se_var + se_int));
  }
}

TEST_CASE("preconditions") {
  auto c = DomainCase::whole_line(2.0, 1.0);
  auto T = make_transform(c, {-5.0, 5.0});
  GridSpec g{-5.0, 5.0, 1.0 / 16.0};
  auto traj = synthetic_trajectory(T, g, 3, 0.5, +[](double, double) { return 1.0; });
  FieldInterpolator interp(traj, T);
  CHECK_THROWS(simulate_paths(interp, 0.0, 0.9, 100, 1e-3, 1));    // horizon too long
  CHECK_THROWS(simulate_paths(interp, 500.0, 0.5, 100, 1e-3, 1));  // x0 outside box
}
