#include "qheat/fbsde.hpp"

#include <algorithm>
#include <cmath>

#include "qheat/rng.hpp"

namespace qheat {

FieldInterpolator::FieldInterpolator(const SolveResult& traj, const Transform& T, Index nx) {
  require(traj.trajectory.size() >= 2, "FieldInterpolator: need at least two snapshots");
  nx_ = nx;
  t_hi_ = traj.trajectory.back().t;
  ht_ = t_hi_ / static_cast<double>(traj.trajectory.size() - 1);

  const GridSpec& g = traj.trajectory.front().grid;
  const double margin = std::sqrt(std::max(0.0, traj.v_sup_seen * t_hi_));
  const double y_lo = g.y_min + margin + g.dy;
  const double y_hi = g.y_max - margin - g.dy;
  require(y_hi > y_lo, "FieldInterpolator: trust region exhausted");
  x_lo_ = T.zeta(y_lo);
  x_hi_ = T.zeta(y_hi);
  hx_ = (x_hi_ - x_lo_) / static_cast<double>(nx_ - 1);

  for (const auto& f : traj.trajectory) {
    const auto phys = v_to_u_derivatives(f, T);
    Field s(nx_);
    Index j = 0;
    const Index n = phys.x.size();
    for (Index i = 0; i < nx_; ++i) {
      const double xq = x_lo_ + hx_ * static_cast<double>(i);
      while (j + 2 < n && phys.x[j + 1] < xq) ++j;
      const double w = (xq - phys.x[j]) / (phys.x[j + 1] - phys.x[j]);
      const double sl = std::sqrt(std::max(0.0, phys.u[j]));
      const double sr = std::sqrt(std::max(0.0, phys.u[j + 1]));
      s[i] = sl + w * (sr - sl);
    }
    slices_.push_back(std::move(s));
  }
}

double FieldInterpolator::sqrt_u(double t, double x) const {
  const double tc = std::clamp(t, 0.0, t_hi_);
  const double xc = std::clamp(x, x_lo_, x_hi_);
  const double ft = tc / ht_;
  Index kt = std::min(static_cast<Index>(ft), static_cast<Index>(slices_.size()) - 2);
  const double wt = ft - static_cast<double>(kt);
  const double fx = (xc - x_lo_) / hx_;
  Index kx = std::min(static_cast<Index>(fx), nx_ - 2);
  const double wx = fx - static_cast<double>(kx);
  const Field& a = slices_[kt];
  const Field& b = slices_[kt + 1];
  const double lo = a[kx] + wx * (a[kx + 1] - a[kx]);
  const double hi = b[kx] + wx * (b[kx + 1] - b[kx]);
  return lo + wt * (hi - lo);
}

PathEnsemble simulate_paths(const SolveResult& traj, const Transform& T, double x0, double T_hor,
                            long n_paths, double dt_sde, uint64_t seed, int n_records) {
  FieldInterpolator interp(traj, T);
  return simulate_paths(interp, x0, T_hor, n_paths, dt_sde, seed, n_records);
}

PathEnsemble simulate_paths(const FieldInterpolator& u, double x0, double T_hor, long n_paths,
                            double dt_sde, uint64_t seed, int n_records) {
  require(T_hor > 0.0 && T_hor <= u.t_hi() * (1.0 + 1e-12),
          "simulate_paths: horizon beyond the tabulated trajectory");
  require(u.contains(x0), "simulate_paths: x0 outside the trusted region");
  require(n_paths > 0 && dt_sde > 0.0, "simulate_paths: bad ensemble parameters");
  require(n_records >= 2, "simulate_paths: need at least the endpoints recorded");

  PathEnsemble e;
  e.n_paths = n_paths;
  e.dt_sde = dt_sde;
  e.x0 = x0;
  e.T = T_hor;
  e.rng_seed = seed;
  const long n_steps = std::max(1L, static_cast<long>(std::llround(T_hor / dt_sde)));
  const double dt = T_hor / static_cast<double>(n_steps);
  const double sq_dt = std::sqrt(dt);

  e.record_times.resize(n_records);
  std::vector<long> record_step(n_records);
  for (int r = 0; r < n_records; ++r) {
    record_step[r] = std::llround(static_cast<double>(n_steps) * r / (n_records - 1));
    e.record_times[r] = dt * static_cast<double>(record_step[r]);
  }
  e.x_at.assign(n_records, std::vector<double>(n_paths));
  e.terminal_values.resize(n_paths);

  for (long p = 0; p < n_paths; ++p) {
    CounterRng rng(seed, static_cast<uint64_t>(p));
    double x = x0;
    bool alive = true;
    int r = 0;
    for (long m = 0; m <= n_steps; ++m) {
      if (r < n_records && m == record_step[r]) e.x_at[r++][p] = x;
      if (m == n_steps) break;
      const double t = dt * static_cast<double>(m);
      if (alive) {
        const double sig = u.sqrt_u(T_hor - t, x);
        x += sig * sq_dt * rng.normal();
        if (!u.contains(x)) {
          x = std::clamp(x, u.x_lo(), u.x_hi());
          alive = false;  // frozen and flagged, never reflected
          ++e.n_exited;
        }
      }
    }
    e.terminal_values[p] = u.u(0.0, x);
  }
  e.exit_fraction = static_cast<double>(e.n_exited) / static_cast<double>(n_paths);
  e.valid = e.exit_fraction < 0.01;
  return e;
}

double mean_of(const std::vector<double>& xs) {
  return pairwise_sum(xs.data(), static_cast<Index>(xs.size())) / static_cast<double>(xs.size());
}

double variance_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  std::vector<double> sq(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
  return pairwise_sum(sq.data(), static_cast<Index>(sq.size())) /
         static_cast<double>(xs.size() - 1);
}

DecouplingReport check_decoupling(const PathEnsemble& e, const FieldInterpolator& u,
                                  double t_check, int n_bins) {
  require(e.valid, "check_decoupling: ensemble invalid (exit fraction >= 1%)");
  require(n_bins >= 1, "check_decoupling: need at least one bin");

  // nearest recorded time
  size_t rk = 0;
  for (size_t r = 1; r < e.record_times.size(); ++r)
    if (std::abs(e.record_times[r] - t_check) < std::abs(e.record_times[rk] - t_check)) rk = r;
  const double tr = e.record_times[rk];
  const std::vector<double>& xs = e.x_at[rk];

  const double mu = mean_of(xs);
  const double sd = std::sqrt(std::max(1e-300, variance_of(xs)));
  const double lo = mu - 2.0 * sd, wide = 4.0 * sd / n_bins;

  DecouplingReport rep;
  std::vector<std::vector<double>> diffs(n_bins);
  std::vector<std::vector<double>> terms(n_bins), fields(n_bins);
  for (long p = 0; p < e.n_paths; ++p) {
    int b = wide > 0.0 ? static_cast<int>(std::floor((xs[p] - lo) / wide)) : 0;
    if (b < 0 || b >= n_bins) continue;
    const double yf = u.u(e.T - tr, xs[p]);
    terms[b].push_back(e.terminal_values[p]);
    fields[b].push_back(yf);
    diffs[b].push_back(e.terminal_values[p] - yf);
  }
  for (int b = 0; b < n_bins; ++b) {
    if (terms[b].size() < 500) continue;
    DecouplingReport::Bin bin;
    bin.center = lo + wide * (b + 0.5);
    bin.count = static_cast<long>(terms[b].size());
    bin.mean_terminal = mean_of(terms[b]);
    bin.mean_field = mean_of(fields[b]);
    const double var_d = variance_of(diffs[b]);
    bin.se_diff = std::sqrt(var_d / static_cast<double>(bin.count));
    const double d = bin.mean_terminal - bin.mean_field;
    bin.std_residual = bin.se_diff > 0.0 ? d / bin.se_diff : 0.0;
    rep.max_std_residual = std::max(rep.max_std_residual, std::abs(bin.std_residual));
    rep.bins.push_back(bin);
  }
  rep.conclusive = !rep.bins.empty();
  return rep;
}

MartingaleReport martingale_check(const PathEnsemble& e, const FieldInterpolator& u) {
  require(e.valid, "martingale_check: ensemble invalid");
  MartingaleReport rep;
  rep.y0 = u.u(e.T, e.x0);
  for (size_t r = 0; r < e.record_times.size(); ++r) {
    const double tr = e.record_times[r];
    std::vector<double> ys(e.n_paths);
    for (long p = 0; p < e.n_paths; ++p) ys[p] = u.u(e.T - tr, e.x_at[r][p]);
    const double m = mean_of(ys);
    const double se = std::sqrt(variance_of(ys) / static_cast<double>(e.n_paths));
    rep.times.push_back(tr);
    rep.mean.push_back(m);
    rep.se.push_back(se);
    // skip degenerate spreads (e.g. the t = 0 record, identical by construction)
    if (se > 1e-9 * (std::abs(rep.y0) + 1.0))
      rep.max_std_drift = std::max(rep.max_std_drift, std::abs(m - rep.y0) / se);
  }
  return rep;
}

}  // namespace qheat
