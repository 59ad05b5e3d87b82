#include "qheat/scenario.hpp"

#include <chrono>
#include <cmath>
#include <set>

#include "qheat/fbsde.hpp"
#include "qheat/sha1.hpp"

namespace qheat {

namespace {

class StrictView {
 public:
  StrictView(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  T get(const char* k, T dflt) {
    seen_.insert(k);
    if (!j_.contains(k)) return dflt;
    try {
      return j_.at(k).get<T>();
    } catch (const Json::exception&) {
      throw ConfigError(path_ + "." + k + ": wrong type");
    }
  }

  bool has(const char* k) {
    seen_.insert(k);
    return j_.contains(k);
  }

  Json sub(const char* k) {
    seen_.insert(k);
    return j_.contains(k) ? j_.at(k) : Json::object();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::map<std::string, double> parse_params(const Json& j, const std::string& path) {
  std::map<std::string, double> out;
  if (j.is_null()) return out;
  if (!j.is_object()) throw ConfigError(path + ": expected an object of numbers");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) throw ConfigError(path + "." + it.key() + ": expected a number");
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

Scheme parse_scheme(const std::string& s) {
  if (s == "semi_implicit_lagged") return Scheme::SemiImplicitLagged;
  if (s == "explicit_cfl") return Scheme::ExplicitCfl;
  throw ConfigError("solver.scheme: unknown value '" + s + "'");
}

BcMode parse_bc(const std::string& s) {
  if (s == "barrier_dirichlet") return BcMode::BarrierDirichlet;
  if (s == "frozen_dirichlet") return BcMode::FrozenDirichlet;
  throw ConfigError("solver.bc_mode: unknown value '" + s + "'");
}

std::string scheme_name(Scheme s) {
  return s == Scheme::SemiImplicitLagged ? "semi_implicit_lagged" : "explicit_cfl";
}
std::string bc_name(BcMode b) {
  return b == BcMode::BarrierDirichlet ? "barrier_dirichlet" : "frozen_dirichlet";
}

}  // namespace

ScenarioConfig parse_config(const Json& j) {
  StrictView top(j, "config");
  ScenarioConfig c;
  c.spec = top.get<int>("spec", 1);
  if (c.spec != 1) throw ConfigError("spec: unsupported schema version");
  c.scenario = top.get<std::string>("scenario", "solve");
  static const std::set<std::string> kinds = {"solve", "blowup", "cut_paste", "fbsde",
                                              "convergence_study"};
  if (!kinds.count(c.scenario)) throw ConfigError("scenario: unknown kind '" + c.scenario + "'");
  c.seed = top.get<uint64_t>("seed", 1);
  c.output_dir = top.get<std::string>("output_dir", "out");

  {
    Json cj = top.sub("case");
    StrictView cv(cj, "case");
    const std::string kind = cv.get<std::string>("kind", "whole_line");
    const double L = cv.get<double>("L", 2.0);
    const double gamma = cv.get<double>("gamma", 2.0);
    const double kappa = cv.get<double>("kappa", 1.0);
    const double K = cv.get<double>("K", 1.0);
    cv.finish();
    try {
      if (kind == "bounded_interval") {
        c.domain = DomainCase::bounded(L, kappa, K);
      } else if (kind == "whole_line") {
        c.domain = DomainCase::whole_line(gamma, kappa, K);
      } else if (kind == "half_line") {
        c.domain = DomainCase::half_line(gamma, kappa, K);
      } else {
        throw ConfigError("case.kind: unknown value '" + kind + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("case: ") + e.what());
    }
  }
  {
    Json uj = top.sub("u0");
    StrictView uv(uj, "u0");
    c.u0_family = uv.get<std::string>("family", "quadratic_plus_one");
    c.u0_params = parse_params(uv.sub("params"), "u0.params");
    c.u0_file = uv.get<std::string>("file", "");
    uv.finish();
    if (c.u0_family == "table" && c.u0_file.empty())
      throw ConfigError("u0: the table family needs a file");
  }
  {
    Json gj = top.sub("grid");
    StrictView gv(gj, "grid");
    c.grid.y_min = gv.get<double>("y_min", -8.0);
    c.grid.y_max = gv.get<double>("y_max", 8.0);
    c.grid.dy = gv.get<double>("dy", 1.0 / 128.0);
    gv.finish();
    if (!(c.grid.dy > 0.0) || !(c.grid.y_min < c.grid.y_max))
      throw ConfigError("grid: need y_min < y_max and dy > 0");
  }
  {
    Json sj = top.sub("solver");
    StrictView sv(sj, "solver");
    c.solver.dy = c.grid.dy;
    c.solver.dt_initial = sv.get<double>("dt_initial", 2e-4);
    c.solver.t_end = sv.get<double>("t_end", 0.5);
    c.solver.scheme = parse_scheme(sv.get<std::string>("scheme", "semi_implicit_lagged"));
    c.solver.picard_iters = sv.get<int>("picard_iters", 2);
    c.solver.bc_mode = parse_bc(sv.get<std::string>("bc_mode", "barrier_dirichlet"));
    c.solver.eps_viscosity = sv.get<double>("eps_viscosity", 0.0);
    c.solver.blowup_thresholds.v_max = sv.get<double>("blowup_v_max", 1e12);
    c.solver.blowup_thresholds.lip_max = sv.get<double>("blowup_lip_max", 1e6);
    c.solver.detect_blowup = sv.get<bool>("detect_blowup", false);
    c.solver.n_snapshots = sv.get<int>("n_snapshots", 11);
    c.solver.diag_every = sv.get<int>("diag_every", 1);
    c.solver.allow_inadmissible = sv.get<bool>("allow_inadmissible", false);
    c.solver.accuracy_factor = sv.get<double>("accuracy_factor", 0.05);
    sv.finish();
    if (c.solver.picard_iters < 0 || c.solver.picard_iters > 10)
      throw ConfigError("solver.picard_iters: must lie in [0, 10]");
  }
  {
    Json bj = top.sub("blowup");
    StrictView bv(bj, "blowup");
    c.blowup.lambda = bv.get<double>("lambda", 0.1);
    c.blowup.target_b = bv.get<double>("target_b", std::log(16.0));
    c.blowup.lip_ladder = bv.get<std::vector<double>>("lip_ladder", {1e2, 1e3, 1e4});
    c.blowup.y_max = bv.get<double>("y_max", 6.0);
    c.blowup.t_end_factor = bv.get<double>("t_end_factor", 0.95);
    c.blowup.run_control = bv.get<bool>("run_control", true);
    c.blowup.n_snapshots = bv.get<int>("n_snapshots", 160);
    bv.finish();
  }
  {
    Json pj = top.sub("cut_paste");
    StrictView pv(pj, "cut_paste");
    c.cut_paste.L = pv.get<double>("L", 6.0);
    c.cut_paste.gap = pv.get<double>("gap", 1.0);
    c.cut_paste.amp_left = pv.get<double>("amp_left", 0.5);
    c.cut_paste.amp_right = pv.get<double>("amp_right", 0.7);
    c.cut_paste.t_end = pv.get<double>("t_end", 0.2);
    c.cut_paste.refine_levels = pv.get<int>("refine_levels", 2);
    pv.finish();
  }
  {
    Json fj = top.sub("fbsde");
    StrictView fv(fj, "fbsde");
    c.fbsde.n_paths = fv.get<long>("n_paths", 100000);
    c.fbsde.dt_sde = fv.get<double>("dt_sde", 2.5e-4);
    c.fbsde.x0 = fv.get<double>("x0", 1.0);
    c.fbsde.T = fv.get<double>("T", 0.5);
    c.fbsde.t_check = fv.get<double>("t_check", 0.25);
    c.fbsde.n_bins = fv.get<int>("n_bins", 8);
    c.fbsde.dump_terminals = fv.get<bool>("dump_terminals", false);
    fv.finish();
  }
  {
    Json vj = top.sub("convergence");
    StrictView vv(vj, "convergence");
    c.convergence.levels = vv.get<int>("levels", 3);
    vv.finish();
  }
  top.finish();
  return c;
}

Json serialize_config(const ScenarioConfig& c) {
  Json j;
  j["spec"] = c.spec;
  j["scenario"] = c.scenario;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["case"] = Json{{"kind", to_string(c.domain.kind)},
                   {"L", c.domain.L},
                   {"gamma", c.domain.gamma},
                   {"kappa", c.domain.kappa},
                   {"K", c.domain.K}};
  j["u0"] = Json{{"family", c.u0_family}, {"params", Json(c.u0_params)}, {"file", c.u0_file}};
  j["grid"] = Json{{"y_min", c.grid.y_min}, {"y_max", c.grid.y_max}, {"dy", c.grid.dy}};
  j["solver"] = Json{{"dt_initial", c.solver.dt_initial},
                     {"t_end", c.solver.t_end},
                     {"scheme", scheme_name(c.solver.scheme)},
                     {"picard_iters", c.solver.picard_iters},
                     {"bc_mode", bc_name(c.solver.bc_mode)},
                     {"eps_viscosity", c.solver.eps_viscosity},
                     {"blowup_v_max", c.solver.blowup_thresholds.v_max},
                     {"blowup_lip_max", c.solver.blowup_thresholds.lip_max},
                     {"detect_blowup", c.solver.detect_blowup},
                     {"n_snapshots", c.solver.n_snapshots},
                     {"diag_every", c.solver.diag_every},
                     {"allow_inadmissible", c.solver.allow_inadmissible},
                     {"accuracy_factor", c.solver.accuracy_factor}};
  j["blowup"] = Json{{"lambda", c.blowup.lambda},
                     {"target_b", c.blowup.target_b},
                     {"lip_ladder", c.blowup.lip_ladder},
                     {"y_max", c.blowup.y_max},
                     {"t_end_factor", c.blowup.t_end_factor},
                     {"run_control", c.blowup.run_control},
                     {"n_snapshots", c.blowup.n_snapshots}};
  j["cut_paste"] = Json{{"L", c.cut_paste.L},
                        {"gap", c.cut_paste.gap},
                        {"amp_left", c.cut_paste.amp_left},
                        {"amp_right", c.cut_paste.amp_right},
                        {"t_end", c.cut_paste.t_end},
                        {"refine_levels", c.cut_paste.refine_levels}};
  j["fbsde"] = Json{{"n_paths", c.fbsde.n_paths},
                    {"dt_sde", c.fbsde.dt_sde},
                    {"x0", c.fbsde.x0},
                    {"T", c.fbsde.T},
                    {"t_check", c.fbsde.t_check},
                    {"n_bins", c.fbsde.n_bins},
                    {"dump_terminals", c.fbsde.dump_terminals}};
  j["convergence"] = Json{{"levels", c.convergence.levels}};
  return j;
}

void apply_override(Json& j, const std::string& keyval) {
  const auto eq = keyval.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like path.key=value");
  std::string path = keyval.substr(0, eq);
  const std::string raw = keyval.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::exception&) {
    value = raw;  // bare strings are fine
  }
  Json* node = &j;
  size_t pos = 0;
  while (true) {
    const size_t dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (key.empty()) throw ConfigError("override has an empty path segment");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

// ---------------------------------------------------------------------------

namespace {

struct RunArtifacts {
  std::vector<std::pair<std::string, std::string>> files;  // name, sha1
};

void note_assert(ScenarioOutcome& out, std::string name, double value, double threshold,
                 bool pass, std::string where = "") {
  out.assertions.push_back({std::move(name), value, threshold, pass, std::move(where)});
}

InitialCondition build_ic(const ScenarioConfig& cfg) {
  if (cfg.u0_family == "table") return make_table_ic(cfg.u0_file);
  if (cfg.u0_family == "quadratic_plus_bump") {
    const double kappa = cfg.domain.kappa;
    const double lambda =
        cfg.u0_params.count("lambda") ? cfg.u0_params.at("lambda") : cfg.blowup.lambda;
    auto bc = build_theta_lambda(kappa, lambda, cfg.blowup.target_b);
    InitialCondition ic;
    ic.family = cfg.u0_family;
    ic.params = {{"kappa", kappa}, {"lambda", lambda}};
    ic.fn = [kappa, vt = bc.vartheta](double x) { return kappa * x * x + vt(x); };
    return ic;
  }
  return make_named_ic(cfg.u0_family, cfg.u0_params, cfg.domain);
}

// closed-form reference when the run is the exact quadratic-rate family
std::function<double(double, double)> closed_form_reference(const ScenarioConfig& cfg,
                                                            double K_used) {
  const double kappa = cfg.domain.kappa;
  if (cfg.u0_family == "quadratic_plus_one" && cfg.domain.kind == IntervalKind::WholeLine &&
      cfg.domain.gamma == 2.0 && kappa == 1.0 && K_used == 1.0) {
    return [](double t, double x) { return (x * x + 1.0) / (1.0 - t); };
  }
  if (cfg.u0_family == "quadratic" && cfg.domain.kind == IntervalKind::HalfLine &&
      cfg.domain.gamma == 2.0 && K_used == 1.0) {
    const double c0 = cfg.u0_params.count("coeff") ? cfg.u0_params.at("coeff") : kappa;
    if (c0 == kappa)
      return [c0](double t, double x) { return c0 * x * x / (1.0 - c0 * t); };
  }
  return {};
}

void solve_assertions(const ScenarioConfig& cfg, const SolveResult& res, const Transform& T,
                      ScenarioOutcome& out) {
  // root-Lipschitz bound lip^2 <= d2_sup + 10 dy scale
  double worst_rl = -1e300;
  std::string rl_at;
  for (const auto& r : res.diagnostics) {
    const double scale = std::max(1.0, r.d2_sup);
    const double v = (r.lip_sqrt * r.lip_sqrt - r.d2_sup) / (10.0 * cfg.grid.dy * scale);
    if (v > worst_rl) {
      worst_rl = v;
      rl_at = "t=" + fmt_full(r.t);
    }
  }
  note_assert(out, "root_lipschitz_bound", worst_rl, 1.0, worst_rl <= 1.0, rl_at);

  note_assert(out, "nonnegativity_clamp", res.clamp_worst, 1e-12, res.clamp_worst <= 1e-12);

  if (cfg.domain.has_boundary()) {
    double worst = 0.0;
    std::string at;
    for (const auto& r : res.diagnostics) {
      const double v = r.zero_residual / std::max(r.u_max, 1e-300);
      if (v > worst) {
        worst = v;
        at = "t=" + fmt_full(r.t);
      }
    }
    note_assert(out, "zero_set_boundary", worst, 1e-8, worst <= 1e-8, at);
  }

  // families that ride a barrier exactly keep only a truncation-level margin
  double worst_margin = 1e300;
  std::string m_at;
  for (const auto& r : res.diagnostics) {
    const double v = r.barrier_margin / std::max(r.u_max, 1e-300);
    if (v < worst_margin) {
      worst_margin = v;
      m_at = "t=" + fmt_full(r.t);
    }
  }
  const double m_tol = -(1e-6 + cfg.grid.dy * cfg.grid.dy + cfg.solver.dt_initial);
  note_assert(out, "sandwich_margin", worst_margin, m_tol, worst_margin >= m_tol, m_at);

  auto ref = closed_form_reference(cfg, res.K_used);
  if (ref) {
    double worst = 0.0;
    std::string at;
    for (const auto& f : res.trajectory) {
      const auto phys = v_to_u_derivatives(f, T);
      const double margin = std::sqrt(std::max(0.0, res.v_sup_seen * f.t));
      const Index off = static_cast<Index>(std::ceil(margin / cfg.grid.dy));
      for (Index i = off; i < f.size() - off; ++i) {
        const double r = ref(f.t, phys.x[i]);
        const double e = std::abs(phys.u[i] - r) / std::max(std::abs(r), 1e-300);
        if (e > worst) {
          worst = e;
          at = "t=" + fmt_full(f.t) + " x=" + fmt_full(phys.x[i]);
        }
      }
    }
    note_assert(out, "closed_form_tracking", worst, 1e-3, worst <= 1e-3, at);
  }
}

Json assertions_json(const std::vector<Assertion>& as) {
  Json arr = Json::array();
  for (const auto& a : as)
    arr.push_back(Json{{"name", a.name},
                       {"value", a.value},
                       {"threshold", a.threshold},
                       {"pass", a.pass},
                       {"where", a.where}});
  return arr;
}

Json diag_summary_json(const SolveResult& res) {
  Json j;
  j["status"] = res.status == SolveStatus::Completed     ? "completed"
                : res.status == SolveStatus::BlowupDetected ? "blowup_detected"
                                                            : "step_failure";
  j["t_stop"] = res.t_stop;
  j["steps"] = res.steps_taken;
  j["K_used"] = res.K_used;
  j["q_running"] = res.q_running;
  j["v_sup_seen"] = res.v_sup_seen;
  j["clamp_worst"] = res.clamp_worst;
  if (res.detection) {
    j["detection"] = Json{{"t_cross", res.detection->t_cross},
                          {"t_star", res.detection->t_star},
                          {"quantity", res.detection->quantity},
                          {"threshold", res.detection->threshold}};
  }
  return j;
}

void emit_common(const ScenarioConfig& cfg, const SolveResult& res, const Transform& T,
                 RunArtifacts& arts) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_snapshots_csv(dir / "snapshots.csv", res, T);
  arts.files.emplace_back("snapshots.csv", sha1_of_file(dir / "snapshots.csv"));
  write_diagnostics_csv(dir / "diagnostics.csv", res.diagnostics);
  arts.files.emplace_back("diagnostics.csv", sha1_of_file(dir / "diagnostics.csv"));
}

void emit_report_and_manifest(const ScenarioConfig& cfg, const ScenarioOutcome& out,
                              const Json& extra_notes, RunArtifacts& arts) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  Json report;
  report["scenario"] = cfg.scenario;
  report["report"] = out.report;
  report["assertions"] = assertions_json(out.assertions);
  write_text_file(dir / "report.json", report.dump(2) + "\n");
  arts.files.emplace_back("report.json", sha1_of_file(dir / "report.json"));

  Json manifest;
  manifest["spec"] = 1;
  const auto now = std::chrono::system_clock::now();
  manifest["created_utc"] =
      static_cast<long long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                 now.time_since_epoch())
                                 .count());
  manifest["config"] = serialize_config(cfg);
  manifest["config_sha1"] = Sha1::of(serialize_config(cfg).dump());
  manifest["notes"] = extra_notes;
  Json files = Json::array();
  for (const auto& [name, sha] : arts.files)
    files.push_back(Json{{"file", name}, {"sha1", sha}});
  manifest["outputs"] = files;
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

ScenarioOutcome run_solve_like(const ScenarioConfig& cfg, bool write_outputs) {
  ScenarioOutcome out;
  auto T = make_transform(cfg.domain, {cfg.grid.y_min, cfg.grid.y_max});
  auto ic = build_ic(cfg);
  attach_certificate(ic, cfg.domain);
  SolverConfig scfg = cfg.solver;
  scfg.dy = cfg.grid.dy;
  auto res = solve(ic, cfg.domain, T, scfg);
  if (res.status == SolveStatus::StepFailure) {
    out.exit_code = 3;
    out.report = diag_summary_json(res);
    return out;
  }
  solve_assertions(cfg, res, T, out);
  out.report = diag_summary_json(res);
  out.report["certificate"] =
      Json{{"admissible", ic.certificate->admissible},
           {"K_found", ic.certificate->K_found},
           {"lip_sqrt_u0", ic.certificate->lip_sqrt_u0}};

  if (write_outputs) {
    RunArtifacts arts;
    emit_common(cfg, res, T, arts);
    Json notes;
    notes["K_used"] = res.K_used;
    notes["y_range"] = Json{cfg.grid.y_min, cfg.grid.y_max};
    notes["trust_margin_final"] = std::sqrt(std::max(0.0, res.v_sup_seen * res.t_stop));
    Json bparams;
    for (const auto& [k, v] : res.barriers.super.params) bparams["super_" + k] = v;
    for (const auto& [k, v] : res.barriers.sub.params) bparams["sub_" + k] = v;
    notes["barriers"] = bparams;
    emit_report_and_manifest(cfg, out, notes, arts);
  }
  for (const auto& a : out.assertions)
    if (!a.pass && out.exit_code == 0) out.exit_code = 2;
  return out;
}

ScenarioOutcome run_blowup_scenario(const ScenarioConfig& cfg, bool write_outputs) {
  ScenarioOutcome out;
  BlowupExperimentConfig bcfg = cfg.blowup;
  bcfg.kappa = cfg.domain.kappa;
  bcfg.dy = cfg.grid.dy;
  auto rep = run_blowup_experiment(bcfg);
  const double kappa = bcfg.kappa;

  if (rep.status == SolveStatus::StepFailure) {
    out.exit_code = 3;
    return out;
  }
  note_assert(out, "divergence_detected", rep.status == SolveStatus::BlowupDetected ? 1.0 : 0.0,
              1.0, rep.status == SolveStatus::BlowupDetected);
  note_assert(out, "measured_before_horizon", rep.measured_t_star * kappa, 1.0,
              rep.measured_t_star * kappa < 1.0);
  note_assert(out, "measured_within_bound_plus_slack", rep.measured_t_star,
              0.5 / kappa + rep.slack, rep.measured_t_star <= 0.5 / kappa + rep.slack);
  note_assert(out, "ladder_slack", rep.slack * kappa, 0.1, rep.slack * kappa < 0.1);
  note_assert(out, "b_in_window", rep.b_value - bcfg.target_b, 0.01,
              rep.b_value >= bcfg.target_b && rep.b_value <= bcfg.target_b + 0.01);
  note_assert(out, "mass_functional_inequality", rep.j_ineq_worst,
              -0.02 * (1.0 + std::abs(rep.b_grid)), rep.j_inequality_ok);
  note_assert(out, "exponential_moment_envelope", rep.exp_moment_worst, -1e-3,
              rep.exp_moment_ok);
  if (rep.control_ran) {
    note_assert(out, "control_no_divergence", rep.control_no_blowup ? 1.0 : 0.0, 1.0,
                rep.control_no_blowup);
    note_assert(out, "control_quadratic_ratio_tracking", rep.control_q_err, 0.02,
                rep.control_q_err <= 0.02);
  }

  Json r;
  r["lambda"] = rep.lambda;
  r["R"] = rep.R;
  r["cap"] = rep.M;
  r["b_value"] = rep.b_value;
  r["b_grid"] = rep.b_grid;
  r["predicted_bound"] = rep.predicted_bound;
  r["kappa"] = kappa;
  r["kappa_case"] = rep.kappa_case;
  r["measured_t_star"] = rep.measured_t_star;
  r["slack"] = rep.slack;
  r["ladder_thresholds"] = rep.ladder_thresholds;
  r["ladder_t_star"] = rep.ladder_t_star;
  r["ladder_t_cross"] = rep.ladder_t_cross;
  r["j_ineq_worst"] = rep.j_ineq_worst;
  r["exp_moment_worst"] = rep.exp_moment_worst;
  r["control_q_err"] = rep.control_q_err;
  r["main_run"] = diag_summary_json(rep.main_run);
  out.report = r;

  if (write_outputs) {
    auto c = DomainCase::half_line(2.0, rep.kappa_case * (1.0 + 1e-9), 1.0);
    auto T = make_transform(c, rep.range_used);
    RunArtifacts arts;
    emit_common(cfg, rep.main_run, T, arts);
    Json notes;
    notes["y_range"] = Json{rep.range_used.y_min, rep.range_used.y_max};
    notes["construction"] = Json{{"R", rep.R}, {"cap", rep.M}, {"b", rep.b_value}};
    emit_report_and_manifest(cfg, out, notes, arts);
  }
  for (const auto& a : out.assertions)
    if (!a.pass && out.exit_code == 0) out.exit_code = 2;
  return out;
}

ScenarioOutcome run_cut_paste_scenario(const ScenarioConfig& cfg, bool write_outputs) {
  ScenarioOutcome out;
  CutPasteConfig pcfg = cfg.cut_paste;
  pcfg.kappa = cfg.domain.kappa;
  pcfg.dy = cfg.grid.dy;
  auto rep = run_cut_paste_experiment(pcfg);

  note_assert(out, "union_matches_sum", rep.finest, 1e-5, rep.finest <= 1e-5);
  note_assert(out, "discrepancy_shrinks", rep.shrinking ? 1.0 : 0.0, 1.0, rep.shrinking);
  note_assert(out, "left_bump_admissible", rep.left_admissible ? 1.0 : 0.0, 1.0,
              rep.left_admissible);
  note_assert(out, "right_bump_admissible", rep.right_admissible ? 1.0 : 0.0, 1.0,
              rep.right_admissible);

  Json r;
  r["dys"] = rep.dys;
  r["rel_discrepancy"] = rep.rel_discrepancy;
  r["finest"] = rep.finest;
  out.report = r;

  if (write_outputs) {
    auto T = make_transform(rep.union_case, {-7.0, 7.0});
    RunArtifacts arts;
    emit_common(cfg, rep.union_run, T, arts);
    emit_report_and_manifest(cfg, out, Json::object(), arts);
  }
  for (const auto& a : out.assertions)
    if (!a.pass && out.exit_code == 0) out.exit_code = 2;
  return out;
}

ScenarioOutcome run_fbsde_scenario(const ScenarioConfig& cfg, bool write_outputs) {
  ScenarioOutcome out;
  auto T = make_transform(cfg.domain, {cfg.grid.y_min, cfg.grid.y_max});
  auto ic = build_ic(cfg);
  attach_certificate(ic, cfg.domain);
  SolverConfig scfg = cfg.solver;
  scfg.dy = cfg.grid.dy;
  scfg.t_end = cfg.fbsde.T;
  scfg.n_snapshots = std::max(scfg.n_snapshots, 65);
  auto res = solve(ic, cfg.domain, T, scfg);
  if (res.status != SolveStatus::Completed) {
    out.exit_code = 3;
    out.report = diag_summary_json(res);
    return out;
  }

  FieldInterpolator interp(res, T);
  auto e = simulate_paths(interp, cfg.fbsde.x0, cfg.fbsde.T, cfg.fbsde.n_paths, cfg.fbsde.dt_sde,
                          cfg.seed);
  note_assert(out, "exit_fraction", e.exit_fraction, 0.01, e.exit_fraction < 0.01);

  const double mean = mean_of(e.terminal_values);
  const double se = std::sqrt(variance_of(e.terminal_values) / e.n_paths);
  const double y0 = interp.u(cfg.fbsde.T, cfg.fbsde.x0);
  note_assert(out, "terminal_mean_matches_field", std::abs(mean - y0), 3.0 * se,
              std::abs(mean - y0) <= 3.0 * se, "x0=" + fmt_full(cfg.fbsde.x0));

  auto mart = martingale_check(e, interp);
  note_assert(out, "martingale_drift", mart.max_std_drift, 3.0, mart.max_std_drift <= 3.0);

  auto dec = check_decoupling(e, interp, cfg.fbsde.t_check, cfg.fbsde.n_bins);
  note_assert(out, "decoupling_residual", dec.max_std_residual, 3.0,
              dec.conclusive && dec.max_std_residual <= 3.0,
              "t_check=" + fmt_full(cfg.fbsde.t_check));

  // determinism: replay a prefix of the ensemble with the same seed
  {
    const long n_replay = std::min<long>(e.n_paths, 2000);
    auto e2 = simulate_paths(interp, cfg.fbsde.x0, cfg.fbsde.T, n_replay, cfg.fbsde.dt_sde,
                             cfg.seed);
    long mismatches = 0;
    for (long p = 0; p < n_replay; ++p)
      if (e2.terminal_values[p] != e.terminal_values[p]) ++mismatches;
    note_assert(out, "seeded_replay_bitwise", static_cast<double>(mismatches), 0.0,
                mismatches == 0);
  }

  // weak-error probe: halved SDE step
  {
    auto eh = simulate_paths(interp, cfg.fbsde.x0, cfg.fbsde.T,
                             std::min<long>(e.n_paths, 20000), 0.5 * cfg.fbsde.dt_sde,
                             cfg.seed + 1);
    out.report["dt_halving_mean_shift"] = mean_of(eh.terminal_values) - mean;
  }

  Json r = out.report;
  r["n_paths"] = e.n_paths;
  r["exit_fraction"] = e.exit_fraction;
  r["terminal_mean"] = mean;
  r["terminal_se"] = se;
  r["field_at_x0"] = y0;
  r["martingale_max_std_drift"] = mart.max_std_drift;
  Json bins = Json::array();
  for (const auto& b : dec.bins)
    bins.push_back(Json{{"center", b.center},
                        {"count", b.count},
                        {"mean_terminal", b.mean_terminal},
                        {"mean_field", b.mean_field},
                        {"se_diff", b.se_diff},
                        {"std_residual", b.std_residual}});
  r["decoupling_bins"] = bins;
  r["solve"] = diag_summary_json(res);
  out.report = r;

  if (write_outputs) {
    RunArtifacts arts;
    emit_common(cfg, res, T, arts);
    if (cfg.fbsde.dump_terminals) {
      const std::filesystem::path dir(cfg.output_dir);
      write_f64_dump(dir / "terminals.bin", e.terminal_values);
      arts.files.emplace_back("terminals.bin", sha1_of_file(dir / "terminals.bin"));
    }
    emit_report_and_manifest(cfg, out, Json::object(), arts);
  }
  for (const auto& a : out.assertions)
    if (!a.pass && out.exit_code == 0) out.exit_code = 2;
  return out;
}

ScenarioOutcome run_convergence_scenario(const ScenarioConfig& cfg, bool write_outputs) {
  ScenarioOutcome out;
  const int levels = std::max(2, cfg.convergence.levels);
  std::vector<SolveResult> runs;
  std::vector<Transform> transforms;
  std::vector<double> dys;
  for (int k = 0; k < levels; ++k) {
    ScenarioConfig lv = cfg;
    lv.grid.dy = cfg.grid.dy / std::pow(2.0, k);
    lv.solver.dt_initial = cfg.solver.dt_initial / std::pow(4.0, k);
    auto T = make_transform(lv.domain, {lv.grid.y_min, lv.grid.y_max});
    auto ic = build_ic(lv);
    attach_certificate(ic, lv.domain);
    SolverConfig scfg = lv.solver;
    scfg.dy = lv.grid.dy;
    auto res = solve(ic, lv.domain, T, scfg);
    if (res.status != SolveStatus::Completed) {
      out.exit_code = 3;
      return out;
    }
    runs.push_back(std::move(res));
    transforms.push_back(std::move(T));
    dys.push_back(lv.grid.dy);
  }

  auto ref = closed_form_reference(cfg, runs[0].K_used);
  std::vector<double> errors;
  for (int k = 0; k < levels; ++k) {
    const auto& fine = runs[k].trajectory.back();
    double err = 0.0;
    if (ref) {
      const auto phys = v_to_u_derivatives(fine, transforms[k]);
      const double margin = std::sqrt(std::max(0.0, runs[k].v_sup_seen * fine.t));
      const Index off = static_cast<Index>(std::ceil(margin / dys[k]));
      for (Index i = off; i < fine.size() - off; ++i) {
        const double r = ref(fine.t, phys.x[i]);
        err = std::max(err, std::abs(phys.u[i] - r) / std::max(std::abs(r), 1e-300));
      }
    } else if (k + 1 < levels) {
      const auto& finer = runs[k + 1].trajectory.back();
      for (Index i = 0; i < fine.size(); ++i)
        err = std::max(err, std::abs(fine.v[i] - finer.v[2 * i]));
    } else {
      break;
    }
    errors.push_back(err);
  }
  double min_ratio = 1e300;
  for (size_t k = 0; k + 1 < errors.size(); ++k)
    min_ratio = std::min(min_ratio, errors[k] / std::max(errors[k + 1], 1e-300));
  note_assert(out, "refinement_ratio", min_ratio, 2.0, min_ratio >= 2.0);

  Json r;
  r["dys"] = dys;
  r["errors"] = errors;
  r["min_ratio"] = min_ratio;
  r["reference"] = ref ? "closed_form" : "self";
  out.report = r;

  if (write_outputs) {
    RunArtifacts arts;
    emit_common(cfg, runs.back(), transforms.back(), arts);
    emit_report_and_manifest(cfg, out, Json::object(), arts);
  }
  for (const auto& a : out.assertions)
    if (!a.pass && out.exit_code == 0) out.exit_code = 2;
  return out;
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& cfg, bool write_outputs) {
  try {
    if (cfg.scenario == "solve") return run_solve_like(cfg, write_outputs);
    if (cfg.scenario == "blowup") return run_blowup_scenario(cfg, write_outputs);
    if (cfg.scenario == "cut_paste") return run_cut_paste_scenario(cfg, write_outputs);
    if (cfg.scenario == "fbsde") return run_fbsde_scenario(cfg, write_outputs);
    if (cfg.scenario == "convergence_study") return run_convergence_scenario(cfg, write_outputs);
    throw ConfigError("scenario: unknown kind '" + cfg.scenario + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string scenario_catalog_text() {
  std::string s;
  s += "scenarios:\n";
  s += "  solve              integrate one initial condition, write snapshots + diagnostics\n";
  s += "  blowup             early-divergence construction, threshold ladder, J functional\n";
  s += "  cut_paste          disjoint bumps: union versus sum locality probe\n";
  s += "  fbsde              path ensemble of dX = sqrt(u(T-t,X)) dB over a solved field\n";
  s += "  convergence_study  refinement ladder against the closed form or self\n";
  s += "initial-condition families:\n";
  for (const auto& f : ic_catalog()) s += "  " + f.name + "\n      " + f.admissibility + "\n";
  return s;
}

}  // namespace qheat
