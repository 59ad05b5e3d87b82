#include "qheat/solver.hpp"

#include <algorithm>
#include <cmath>

namespace qheat {

namespace {

// In-place tridiagonal solve; a is the subdiagonal (a[0] unused), b the
// diagonal, c the superdiagonal (c[n-1] unused), d the right side and the
// solution on return. The diffusion rows are strictly diagonally dominant.
void thomas_solve(Field& a, Field& b, Field& c, Field& d) {
  const Index n = b.size();
  for (Index i = 1; i < n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
  }
  d[n - 1] /= b[n - 1];
  for (Index i = n - 2; i >= 0; --i) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

// advection + reaction terms of the transformed evolution at the iterate w
Field explicit_terms(const StepContext& ctx, const Field& w) {
  const Index n = w.size();
  Field r = Field::Zero(n);
  const double inv2dy = 1.0 / (2.0 * ctx.grid.dy);
  const auto wm = w.segment(0, n - 2);
  const auto wc = w.segment(1, n - 2);
  const auto wp = w.segment(2, n - 2);
  r.segment(1, n - 2) = ctx.c_adv.segment(1, n - 2) * wc * ((wp - wm) * inv2dy) +
                        ctx.c_rea.segment(1, n - 2) * wc.square();
  return r;
}

StepResult step_semi_implicit(const FieldPair& f, const StepContext& ctx, double dt) {
  const Index n = f.size();
  const double dy2 = ctx.grid.dy * ctx.grid.dy;
  const double bcl = ctx.bc_left(f.t + dt);
  const double bcr = ctx.bc_right(f.t + dt);

  StepResult out;
  Field w = f.v;
  double prev_delta = std::numeric_limits<double>::infinity();
  const int n_solves = std::max(1, ctx.picard_iters);
  for (int k = 0; k < n_solves; ++k) {
    Field rhs = f.v + dt * explicit_terms(ctx, w);
    rhs[0] = bcl;
    rhs[n - 1] = bcr;

    Field a = Field::Zero(n), b = Field::Ones(n), c = Field::Zero(n);
    const Field theta = (0.5 * dt / dy2) * (w + ctx.eps);
    a.segment(1, n - 2) = -theta.segment(1, n - 2);
    c.segment(1, n - 2) = -theta.segment(1, n - 2);
    b.segment(1, n - 2) += 2.0 * theta.segment(1, n - 2);
    thomas_solve(a, b, c, rhs);

    if (!rhs.allFinite()) {
      out.ok = false;
      return out;
    }
    const double delta = (rhs - w).abs().maxCoeff();
    const double floor = 1e-14 * (1.0 + w.abs().maxCoeff());
    if (k >= 1 && delta > prev_delta && delta > floor) {
      out.ok = false;
      out.noncontraction = true;
      return out;
    }
    prev_delta = delta;
    w = std::move(rhs);
  }

  for (Index i = 0; i < n; ++i) {
    if (w[i] < 0.0) {
      out.clamp_mass -= w[i];
      w[i] = 0.0;
    }
  }
  out.field = FieldPair{f.t + dt, f.grid, std::move(w)};
  return out;
}

StepResult step_explicit(const FieldPair& f, const StepContext& ctx, double dt) {
  const Index n = f.size();
  const double dy2 = ctx.grid.dy * ctx.grid.dy;
  const double vmax = (f.v + ctx.eps).maxCoeff();
  require(dt <= 0.4 * dy2 / std::max(vmax, 1e-300) * (1.0 + 1e-12),
          "explicit step: dt violates the stability rule 0.4 dy^2 / max(v + eps)");

  StepResult out;
  Field w = f.v + dt * explicit_terms(ctx, f.v);
  const Field d2 = diff2(f.v, ctx.grid.dy);
  w.segment(1, n - 2) +=
      dt * 0.5 * (f.v.segment(1, n - 2) + ctx.eps) * d2.segment(1, n - 2);
  w[0] = ctx.bc_left(f.t + dt);
  w[n - 1] = ctx.bc_right(f.t + dt);

  if (!w.allFinite()) {
    out.ok = false;
    return out;
  }
  for (Index i = 0; i < n; ++i) {
    if (w[i] < 0.0) {
      out.clamp_mass -= w[i];
      w[i] = 0.0;
    }
  }
  out.field = FieldPair{f.t + dt, f.grid, std::move(w)};
  return out;
}

double accuracy_cap(const StepContext& ctx, const Field& v, double factor) {
  const Field vy = diff1(v, ctx.grid.dy);
  const double rate =
      ((ctx.c_rea.abs() * (v + ctx.eps)) + (ctx.c_adv * vy).abs()).maxCoeff();
  double cap = factor / std::max(rate, 1e-12);
  if (ctx.scheme == Scheme::ExplicitCfl) {
    const double vmax = (v + ctx.eps).maxCoeff();
    cap = std::min(cap, 0.4 * ctx.grid.dy * ctx.grid.dy / std::max(vmax, 1e-300));
  }
  return cap;
}

}  // namespace

StepContext make_step_context(const Transform& T, const GridSpec& grid, const SolverConfig& cfg,
                              std::function<double(double)> bc_left,
                              std::function<double(double)> bc_right) {
  StepContext ctx;
  ctx.grid = grid;
  const Field y = grid.y_grid();
  const Field z1 = T.dzeta(y);
  ctx.c_adv = 1.5 * T.d2zeta(y) / z1;
  ctx.c_rea = T.d3zeta(y) / z1;
  ctx.eps = cfg.eps_viscosity;
  ctx.scheme = cfg.scheme;
  ctx.picard_iters = cfg.picard_iters;
  ctx.bc_left = std::move(bc_left);
  ctx.bc_right = std::move(bc_right);
  return ctx;
}

StepResult step(const FieldPair& f, const StepContext& ctx, double dt) {
  require(dt > 0.0, "step: dt must be positive");
  require(f.size() >= 5, "step: need at least 5 nodes");
  if (ctx.scheme == Scheme::ExplicitCfl) return step_explicit(f, ctx, dt);
  return step_semi_implicit(f, ctx, dt);
}

StepResult step(const FieldPair& f, const Transform& T, const SolverConfig& cfg, double dt) {
  const double vl = f.v[0], vr = f.v[f.size() - 1];
  auto ctx = make_step_context(T, f.grid, cfg, [vl](double) { return vl; },
                               [vr](double) { return vr; });
  return step(f, ctx, dt);
}

std::optional<double> fit_inverse_divergence(const std::vector<std::pair<double, double>>& tm) {
  // 1/m = alpha - beta t  =>  T = alpha / beta
  double st = 0, sz = 0, stt = 0, stz = 0;
  long n = 0;
  for (const auto& [t, m] : tm) {
    if (m <= 0.0) continue;
    const double z = 1.0 / m;
    st += t;
    sz += z;
    stt += t * t;
    stz += t * z;
    ++n;
  }
  if (n < 3) return std::nullopt;
  const double det = n * stt - st * st;
  if (det <= 0.0) return std::nullopt;
  const double beta = -(n * stz - st * sz) / det;
  const double alpha = (sz + beta * st) / n;
  if (beta <= 0.0) return std::nullopt;
  return alpha / beta;
}

namespace {

double report_quantity(const DiagnosticsReport& r, const std::string& q) {
  if (q == "v_max") return r.v_max;
  if (q == "lip_sqrt") return r.lip_sqrt * r.lip_sqrt;  // follows c/(T-t)
  return r.d2_sup;
}

std::optional<BlowupDetection> detection_at(const std::vector<DiagnosticsReport>& series,
                                            size_t i_cross, const std::string& q,
                                            double threshold) {
  const double m_cross = report_quantity(series[i_cross], q);
  std::vector<std::pair<double, double>> window;
  for (size_t j = 0; j <= i_cross; ++j) {
    const double m = report_quantity(series[j], q);
    if (m >= 0.25 * m_cross) window.emplace_back(series[j].t, m);
  }
  BlowupDetection det;
  det.t_cross = series[i_cross].t;
  det.quantity = q;
  det.threshold = threshold;
  const auto fit = fit_inverse_divergence(window);
  det.t_star = fit.value_or(det.t_cross);
  return det;
}

}  // namespace

std::optional<BlowupDetection> detect_blowup(const std::vector<DiagnosticsReport>& series,
                                             const BlowupThresholds& thr) {
  const double d2_thr = thr.lip_max * thr.lip_max;
  for (size_t i = 0; i < series.size(); ++i) {
    const auto& r = series[i];
    if (r.v_max >= thr.v_max) return detection_at(series, i, "v_max", thr.v_max);
    if (r.lip_sqrt >= thr.lip_max)
      return detection_at(series, i, "lip_sqrt", thr.lip_max);
    if (r.d2_sup >= d2_thr) return detection_at(series, i, "d2_sup", d2_thr);
  }
  return std::nullopt;
}

SolveResult solve(const InitialCondition& u0, const DomainCase& c, const Transform& T,
                  const SolverConfig& cfg, const Barrier* bc_override) {
  require(cfg.dy > 0.0, "solve: dy must be positive");
  require(cfg.dt_initial > 0.0, "solve: dt_initial must be positive");
  require(cfg.picard_iters >= 0 && cfg.picard_iters <= 10,
          "solve: picard_iters must lie in [0, 10]");
  require(cfg.t_end > 0.0, "solve: t_end must be positive");
  if (!cfg.allow_inadmissible) {
    require(u0.certificate.has_value() && u0.certificate->admissible,
            "solve: u0 lacks a valid admissibility certificate "
            "(set allow_inadmissible to override)");
  }

  SolveResult res;
  res.K_used = c.K;
  if (u0.certificate.has_value() && std::isfinite(u0.certificate->K_found))
    res.K_used = std::max(res.K_used, u0.certificate->K_found);
  DomainCase cb = c;
  cb.K = res.K_used;
  switch (c.kind) {
    case IntervalKind::BoundedInterval:
      res.barriers = interval_barriers(cb, cfg.eps_viscosity, false);
      break;
    case IntervalKind::WholeLine: res.barriers = line_barriers(cb, false); break;
    case IntervalKind::HalfLine:
      res.barriers = half_line_barriers(cb, cfg.eps_viscosity, false);
      break;
  }

  const double horizon = res.barriers.super.t_max;
  if (cfg.t_end >= horizon && !cfg.detect_blowup)
    throw std::invalid_argument(
        "solve: t_end reaches the barrier horizon 1/kappa; arm blow-up detection to proceed");

  GridSpec grid{T.y_range().y_min, T.y_range().y_max, cfg.dy};
  const Index n = grid.n();
  require(n >= 8, "solve: grid too coarse");
  const Field y = grid.y_grid();
  const Field x = T.zeta(y);
  Field u0s(n);
  for (Index i = 0; i < n; ++i) u0s[i] = u0.fn(x[i]) + cfg.eps_viscosity;
  FieldPair f = u_to_v(u0s, T, grid, 0.0);

  std::vector<Index> zero_nodes;
  for (Index i = 0; i < n; ++i)
    if (u0s[i] == 0.0) zero_nodes.push_back(i);

  // Dirichlet data in the transformed variable
  std::function<double(double)> bcl, bcr;
  if (cfg.bc_mode == BcMode::FrozenDirichlet) {
    bcl = [v = f.v[0]](double) { return v; };
    bcr = [v = f.v[n - 1]](double) { return v; };
  } else {
    const Barrier B = bc_override != nullptr ? *bc_override : res.barriers.super;
    const double xl = x[0], xr = x[n - 1];
    const double wl = T.dzeta(y[0]) * T.dzeta(y[0]);
    const double wr = T.dzeta(y[n - 1]) * T.dzeta(y[n - 1]);
    bcl = [B, xl, wl](double t) { return B.eval(t, xl) / wl; };
    bcr = [B, xr, wr](double t) { return B.eval(t, xr) / wr; };
  }
  StepContext ctx = make_step_context(T, grid, cfg, bcl, bcr);

  // snapshot schedule
  std::vector<double> snap_times;
  const int ns = std::max(2, cfg.n_snapshots);
  for (int k = 0; k < ns; ++k) snap_times.push_back(cfg.t_end * k / (ns - 1));

  res.v_sup_seen = f.v.maxCoeff();
  auto trust_indices = [&](double t) {
    const double margin = std::sqrt(std::max(0.0, res.v_sup_seen * t));
    const Index off = static_cast<Index>(std::ceil(margin / grid.dy));
    return std::pair<Index, Index>{off, n - 1 - off};
  };
  auto record_diag = [&](const FieldPair& fp) {
    auto [lo, hi] = trust_indices(fp.t);
    const double margin = std::sqrt(std::max(0.0, res.v_sup_seen * fp.t));
    auto rep = compute_report(fp, T, c, &res.barriers, zero_nodes, lo, hi, margin);
    res.q_running = std::max(res.q_running, rep.q_ratio);
    res.diagnostics.push_back(rep);
  };

  record_diag(f);
  res.trajectory.push_back(f);
  size_t next_snap = 1;

  const BlowupThresholds& thr = cfg.blowup_thresholds;
  const double d2_thr = thr.lip_max * thr.lip_max;
  double t = 0.0;
  long since_diag = 0;
  while (t < cfg.t_end * (1.0 - 1e-14)) {
    double dt_try = std::min(cfg.dt_initial, accuracy_cap(ctx, f.v, cfg.accuracy_factor));
    if (next_snap < snap_times.size()) dt_try = std::min(dt_try, snap_times[next_snap] - t);
    dt_try = std::min(dt_try, cfg.t_end - t);

    int halvings = 0;
    StepResult sr;
    while (true) {
      sr = step(f, ctx, dt_try);
      if (sr.ok) break;
      dt_try *= 0.5;
      if (++halvings >= 6) {
        res.status = SolveStatus::StepFailure;
        res.t_stop = t;
        return res;
      }
    }
    f = std::move(sr.field);
    t = f.t;
    ++res.steps_taken;
    res.v_sup_seen = std::max(res.v_sup_seen, f.v.maxCoeff());
    const double scale = std::max(1e-300, f.v.maxCoeff());
    res.clamp_worst = std::max(res.clamp_worst, sr.clamp_mass / scale);

    const bool at_snap =
        next_snap < snap_times.size() && t >= snap_times[next_snap] - 1e-12 * (1.0 + t);
    const bool at_end = t >= cfg.t_end * (1.0 - 1e-14);
    if (++since_diag >= cfg.diag_every || at_snap || at_end || cfg.detect_blowup) {
      record_diag(f);
      since_diag = 0;
    }
    if (at_snap) {
      res.trajectory.push_back(f);
      ++next_snap;
    }

    if (cfg.detect_blowup) {
      const auto& r = res.diagnostics.back();
      std::string q;
      double threshold = 0.0;
      if (r.v_max >= thr.v_max) {
        q = "v_max";
        threshold = thr.v_max;
      } else if (r.lip_sqrt >= thr.lip_max) {
        q = "lip_sqrt";
        threshold = thr.lip_max;
      } else if (r.d2_sup >= d2_thr) {
        q = "d2_sup";
        threshold = d2_thr;
      }
      if (!q.empty()) {
        res.detection = detect_blowup(res.diagnostics, thr);
        if (!res.detection.has_value()) {
          BlowupDetection det;
          det.t_cross = t;
          det.t_star = t;
          det.quantity = q;
          det.threshold = threshold;
          res.detection = det;
        }
        res.status = SolveStatus::BlowupDetected;
        res.t_stop = t;
        return res;
      }
    }
  }

  res.status = SolveStatus::Completed;
  res.t_stop = t;
  return res;
}

}  // namespace qheat
