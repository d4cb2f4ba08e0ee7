#include "tikflow/experiment.hpp"

#include "tikflow/csv.hpp"

#include <filesystem>
#include <fstream>

namespace tikflow {

namespace fs = std::filesystem;

ObjectiveOracle problem_from_config(const Config& cfg) {
  return make_problem(cfg.get_string("problem.name"),
                      cfg.get_u64("problem.seed", 42),
                      static_cast<int>(cfg.get_long("problem.m", 40)),
                      static_cast<int>(cfg.get_long("problem.n", 50)));
}

FlowParams flow_from_config(const Config& cfg) {
  FlowParams f;
  f.alpha = cfg.get_double("flow.alpha");
  f.beta = cfg.get_double("flow.beta", 0.0);
  f.a = cfg.get_double("flow.a", 0.0);
  f.p = cfg.get_double("flow.p", 0.0);
  f.q = cfg.get_double("flow.q", 0.0);
  f.delta.c = cfg.get_double("flow.delta_c", 1.0);
  f.delta.theta = cfg.get_double("flow.delta_theta", 0.0);
  f.t0 = cfg.get_double("flow.t0", 1.0);
  if (cfg.has("flow.K1")) f.K1 = cfg.get_double("flow.K1");
  f.validate();
  return f;
}

StepParams step_from_config(const Config& cfg) {
  StepParams s;
  s.h = cfg.get_double("step.h", 1.0);
  s.alpha = cfg.get_double("step.alpha");
  s.beta = cfg.get_double("step.beta", 0.0);
  s.a = cfg.get_double("step.a", 0.0);
  s.p = cfg.get_double("step.p", 0.0);
  s.q = cfg.get_double("step.q", 0.0);
  s.delta.c = cfg.get_double("step.delta_c", 1.0);
  s.delta.theta = cfg.get_double("step.delta_theta", 0.0);
  s.validate();
  return s;
}

namespace {

Vec vec_from(const Config& cfg, const std::string& key, int dim) {
  if (!cfg.has(key)) return Vec::Ones(dim);
  const std::vector<double> v = cfg.get_vector(key);
  if (static_cast<int>(v.size()) == 1) return Vec::Constant(dim, v[0]);
  if (static_cast<int>(v.size()) != dim)
    throw ConfigError("key `" + key + "`: expected " + std::to_string(dim) +
                      " components");
  return Eigen::Map<const Vec>(v.data(), dim);
}

struct Manifest {
  std::vector<std::string> artifacts;
  bool complete = false;
  void add(const std::string& name) { artifacts.push_back(name); }
  void write(const std::string& out_dir) const {
    std::ofstream out(fs::path(out_dir) / "MANIFEST", std::ios::binary);
    out << "status=" << (complete ? "complete" : "incomplete") << "\n";
    for (const auto& a : artifacts) out << a << "\n";
  }
};

void write_stats_csv(const std::string& path,
                     const std::vector<std::tuple<std::string, double, double, long>>& rows) {
  CsvWriter w(path, {"system", "wall_clock_s", "avg_step", "points"});
  for (const auto& [name, wall, avg, pts] : rows) {
    w.cell(name);
    w.cell(wall);
    w.cell(avg);
    w.cell(static_cast<double>(pts));
    w.end_row();
  }
}

void write_regime_report(const std::string& dir, const RegimeReport& rep) {
  {
    CsvWriter w(fs::path(dir) / "regime.csv", {"key", "value"});
    auto row = [&](const std::string& k, const std::string& v) {
      w.cell(k);
      w.cell(v);
      w.end_row();
    };
    row("setting", rep.setting == RegimeReport::Setting::continuous ? "continuous"
                                                                    : "discrete");
    row("theorem_case", rep.theorem_case);
    for (const auto& [k, v] : rep.predicted_exponents)
      row("exponent." + k, format_double(v));
    for (const auto& c : rep.condition_checks)
      row("check." + c.name, (c.holds ? std::string("holds ") : std::string("fails ")) +
                                 format_double(c.threshold));
    for (std::size_t i = 0; i < rep.notes.size(); ++i)
      row("note." + std::to_string(i), rep.notes[i]);
  }
  std::ofstream txt(fs::path(dir) / "regime.txt", std::ios::binary);
  txt << "setting = "
      << (rep.setting == RegimeReport::Setting::continuous ? "continuous" : "discrete")
      << "\ntheorem_case = " << rep.theorem_case << "\n";
  for (const auto& [k, v] : rep.predicted_exponents)
    txt << "exponent." << k << " = " << format_double(v) << "\n";
  for (const auto& c : rep.condition_checks)
    txt << "check." << c.name << " = " << (c.holds ? "holds" : "fails")
        << " (threshold " << format_double(c.threshold) << ")\n";
  for (const auto& n : rep.notes) txt << "note = " << n << "\n";
}

void write_slopes_csv(const std::string& path,
                      const std::vector<std::pair<std::string, SlopeFit>>& fits) {
  CsvWriter w(path, {"series", "slope", "intercept", "r_squared", "window_lo",
                     "window_hi", "used_envelope", "exhausted"});
  for (const auto& [name, f] : fits) {
    w.cell(name);
    w.cell(f.slope);
    w.cell(f.intercept);
    w.cell(f.r_squared);
    w.cell(f.window_lo);
    w.cell(f.window_hi);
    w.cell(std::string(f.used_envelope ? "1" : "0"));
    w.cell(std::string(f.exhausted ? "1" : "0"));
    w.end_row();
  }
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int dim) {
  std::vector<std::string> header{"t"};
  for (int i = 0; i < dim; ++i) header.push_back("x" + std::to_string(i));
  for (const char* c : {"g_gap", "grad_norm", "dist_min_norm", "energy_Eb",
                        "energy_E", "step_size"})
    header.push_back(c);
  CsvWriter w(path, header);
  for (const auto& s : traj.samples) {
    w.cell(s.t);
    for (int i = 0; i < dim; ++i) w.cell(s.x[i]);
    w.cell(s.g_gap);
    w.cell(s.grad_norm);
    w.cell(s.dist_min_norm);
    if (std::isnan(s.energy_Eb)) w.cell_blank(); else w.cell(s.energy_Eb);
    if (std::isnan(s.energy_E)) w.cell_blank(); else w.cell(s.energy_E);
    w.cell(s.step_size);
    w.end_row();
  }
}

void write_iterates_csv(const std::string& path, const IterateLog& log, int dim,
                        bool with_calE, bool with_E) {
  std::vector<std::string> header{"k"};
  for (int i = 0; i < dim; ++i) header.push_back("x" + std::to_string(i));
  for (const char* c : {"g_gap", "grad_norm", "dist_min_norm", "step_norm", "d_k",
                        "rho_k", "a_k", "energy_calE", "energy_E"})
    header.push_back(c);
  CsvWriter w(path, header);
  for (const auto& r : log.records) {
    w.cell(static_cast<double>(r.k));
    for (int i = 0; i < dim; ++i) w.cell(r.x[i]);
    w.cell(r.g_gap);
    w.cell(r.grad_norm);
    w.cell(r.dist_min_norm);
    w.cell(r.step_norm);
    w.cell(r.d_k);
    w.cell(r.rho_k);
    w.cell(r.a_k);
    if (with_calE && !std::isnan(r.energy_calE)) w.cell(r.energy_calE); else w.cell_blank();
    if (with_E && !std::isnan(r.energy_E)) w.cell(r.energy_E); else w.cell_blank();
    w.end_row();
  }
}

namespace {

void fill_energies(Trajectory& traj, const Config& cfg, const FlowParams& flow,
                   const ObjectiveOracle& oracle) {
  const bool want_Eb = cfg.get_long("energy.Eb", 0) != 0;
  const bool want_E = cfg.get_long("energy.E", 0) != 0;
  if (!want_Eb && !want_E) return;
  const LyapunovKnobs knobs = default_knobs(flow);
  Vec xstar;
  if (want_Eb) xstar = min_norm_solution(oracle);
  for (auto& s : traj.samples) {
    if (want_Eb) s.energy_Eb = energy_Eb(s, knobs, flow, oracle, xstar);
    if (want_E) s.energy_E = energy_strong(s, knobs, flow, oracle);
  }
}

std::pair<double, double> slope_window(const Config& cfg) {
  return {cfg.get_double("slope.window_lo", 0.5), cfg.get_double("slope.window_hi", 1.0)};
}

int mode_run_ode(const Config& cfg, const std::string& out_dir, Manifest& man) {
  const ObjectiveOracle oracle = problem_from_config(cfg);
  const FlowParams flow = flow_from_config(cfg);
  const Vec x0 = vec_from(cfg, "flow.x0", oracle.dimension);
  const Vec v0 = vec_from(cfg, "flow.v0", oracle.dimension);
  Tolerances tol{cfg.get_double("flow.rtol", 1e-6), cfg.get_double("flow.atol", 1e-9)};
  Trajectory traj =
      integrate(flow, oracle, x0, v0, cfg.get_double("flow.t_end"), tol,
                static_cast<int>(cfg.get_long("flow.samples", 400)));
  fill_energies(traj, cfg, flow, oracle);
  write_trajectory_csv(fs::path(out_dir) / "trajectory.csv", traj, oracle.dimension);
  man.add("trajectory.csv");
  write_stats_csv(fs::path(out_dir) / "stats.csv",
                  {{"flow", traj.stats.wall_time_s, traj.stats.avg_step,
                    traj.stats.accepted + 1}});
  man.add("stats.csv");
  write_regime_report(out_dir, predict_rates(flow));
  man.add("regime.csv");
  man.add("regime.txt");
  std::vector<double> ts, gaps, dists;
  for (const auto& s : traj.samples) {
    ts.push_back(s.t);
    gaps.push_back(s.g_gap);
    dists.push_back(s.dist_min_norm);
  }
  write_slopes_csv(fs::path(out_dir) / "slopes.csv",
                   {{"g_gap", fit_loglog_slope(ts, gaps, slope_window(cfg))},
                    {"dist_min_norm", fit_loglog_slope(ts, dists, slope_window(cfg))}});
  man.add("slopes.csv");
  return 0;
}

int mode_run_ipga(const Config& cfg, const std::string& out_dir, Manifest& man) {
  const ObjectiveOracle oracle = problem_from_config(cfg);
  const StepParams step = step_from_config(cfg);
  const Vec x0 = vec_from(cfg, "step.x0", oracle.dimension);
  const Vec x1 = vec_from(cfg, "step.x1", oracle.dimension);
  IterateLog log = run_ipga(step, oracle, x0, x1, cfg.get_long("step.K"));
  const bool want_calE = cfg.get_long("energy.calE", 0) != 0;
  const bool want_E = cfg.get_long("energy.E", 0) != 0;
  if (want_calE) {
    const Vec xstar = min_norm_solution(oracle);
    const auto e = discrete_energy(log, DiscreteEnergyKind::calE,
                                   default_lambda_calE(step), oracle, xstar);
    for (std::size_t i = 0; i < e.size(); ++i) log.records[i].energy_calE = e[i];
  }
  if (want_E) {
    const auto e = discrete_energy(log, DiscreteEnergyKind::E, default_lambda_E(step),
                                   oracle, Vec());
    for (std::size_t i = 0; i < e.size(); ++i) log.records[i].energy_E = e[i];
  }
  write_iterates_csv(fs::path(out_dir) / "iterates.csv", log, oracle.dimension,
                     want_calE, want_E);
  man.add("iterates.csv");
  write_stats_csv(fs::path(out_dir) / "stats.csv",
                  {{"ipga", log.wall_time_s, step.h,
                    static_cast<long>(log.records.size())}});
  man.add("stats.csv");
  write_regime_report(out_dir, predict_rates(step));
  man.add("regime.csv");
  man.add("regime.txt");
  std::vector<double> ks, gaps, dists;
  for (const auto& r : log.records) {
    ks.push_back(static_cast<double>(r.k));
    gaps.push_back(r.g_gap);
    dists.push_back(r.dist_min_norm);
  }
  write_slopes_csv(fs::path(out_dir) / "slopes.csv",
                   {{"g_gap", fit_loglog_slope(ks, gaps, slope_window(cfg))},
                    {"dist_min_norm", fit_loglog_slope(ks, dists, slope_window(cfg))}});
  man.add("slopes.csv");
  return 0;
}

int mode_compare(const Config& cfg, const std::string& out_dir, Manifest& man) {
  const std::string kind = cfg.get_string("compare.kind", "ode");
  const ObjectiveOracle oracle = problem_from_config(cfg);
  std::vector<std::tuple<std::string, double, double, long>> stats;
  if (kind == "ode") {
    const FlowParams full = flow_from_config(cfg);
    FlowParams sys6 = full;  // vanishing damping only
    sys6.beta = 0.0;
    sys6.delta = DeltaSpec{1.0, 0.0};
    FlowParams sys8 = full;  // constant damping / constant weight
    sys8.q = 0.0;
    sys8.p = 0.0;
    const Vec x0 = vec_from(cfg, "flow.x0", oracle.dimension);
    const Vec v0 = vec_from(cfg, "flow.v0", oracle.dimension);
    Tolerances tol{cfg.get_double("flow.rtol", 1e-6), cfg.get_double("flow.atol", 1e-9)};
    const double t_end = cfg.get_double("flow.t_end");
    const int ns = static_cast<int>(cfg.get_long("flow.samples", 400));
    const std::pair<std::string, const FlowParams*> runs[] = {
        {"system6", &sys6}, {"system8", &sys8}, {"system9", &full}};
    for (const auto& [name, fp] : runs) {
      Trajectory traj = integrate(*fp, oracle, x0, v0, t_end, tol, ns);
      write_trajectory_csv(fs::path(out_dir) / ("trajectory_" + name + ".csv"), traj,
                           oracle.dimension);
      man.add("trajectory_" + name + ".csv");
      stats.emplace_back(name, traj.stats.wall_time_s, traj.stats.avg_step,
                         traj.stats.accepted + 1);
    }
  } else if (kind == "ipga") {
    const StepParams step = step_from_config(cfg);
    const Vec x0 = vec_from(cfg, "step.x0", oracle.dimension);
    const Vec x1 = vec_from(cfg, "step.x1", oracle.dimension);
    const long K = cfg.get_long("step.K");
    const std::pair<std::string, Baseline> runs[] = {
        {"full", Baseline::full},
        {"no_hessian", Baseline::no_hessian},
        {"no_decay", Baseline::no_decay}};
    for (const auto& [name, bl] : runs) {
      IterateLog log = run_ipga(step, oracle, x0, x1, K, bl);
      write_iterates_csv(fs::path(out_dir) / ("iterates_" + name + ".csv"), log,
                         oracle.dimension, false, false);
      man.add("iterates_" + name + ".csv");
      stats.emplace_back(name, log.wall_time_s, step.h,
                         static_cast<long>(log.records.size()));
    }
  } else {
    throw ConfigError("compare.kind must be `ode` or `ipga`");
  }
  write_stats_csv(fs::path(out_dir) / "stats.csv", stats);
  man.add("stats.csv");
  return 0;
}

int mode_predict(const Config& cfg, const std::string& out_dir, Manifest& man) {
  const std::string setting = cfg.get_string("predict.setting", "continuous");
  RegimeReport rep = setting == "discrete"
                         ? predict_rates(step_from_config(cfg))
                         : predict_rates(flow_from_config(cfg));
  write_regime_report(out_dir, rep);
  man.add("regime.csv");
  man.add("regime.txt");
  return 0;
}

int mode_audit(const Config& cfg, const std::string& out_dir, Manifest& man) {
  const ObjectiveOracle oracle = problem_from_config(cfg);
  const FlowParams flow = flow_from_config(cfg);
  const Vec x0 = vec_from(cfg, "flow.x0", oracle.dimension);
  const Vec v0 = vec_from(cfg, "flow.v0", oracle.dimension);
  Tolerances tol{cfg.get_double("flow.rtol", 1e-6), cfg.get_double("flow.atol", 1e-9)};
  Trajectory traj =
      integrate(flow, oracle, x0, v0, cfg.get_double("flow.t_end"), tol,
                static_cast<int>(cfg.get_long("flow.samples", 400)));
  const LyapunovKnobs knobs = default_knobs(flow);
  const std::string kind_s = cfg.get_string("audit.kind", "Eb");
  const EnergyKind kind = kind_s == "strong" ? EnergyKind::strong : EnergyKind::Eb;
  const DecayReport rep = decay_audit(traj, kind, knobs, flow, oracle);
  CsvWriter w(fs::path(out_dir) / "audit.csv",
              {"kind", "onset_t", "fitted_C", "max_violation", "passed"});
  w.cell(kind_s);
  w.cell(rep.onset_t);
  w.cell(rep.fitted_source_constant);
  w.cell(rep.max_violation);
  w.cell(std::string(rep.passed ? "1" : "0"));
  w.end_row();
  man.add("audit.csv");
  return rep.passed ? 0 : 1;
}

int mode_check_appendix(const Config& cfg, const std::string& out_dir, Manifest& man) {
  StepParams step = step_from_config(cfg);
  const double lambda = cfg.get_double("appendix.lambda", default_lambda_E(step));
  const double s = cfg.get_double("appendix.s", step.h * step.a / (8.0 * step.alpha));
  const long kmax = cfg.get_long("appendix.kmax", 10000);
  const auto scans = appendix_onset_scan(step, lambda, s, kmax);
  CsvWriter w(fs::path(out_dir) / "appendix_onsets.csv",
              {"sequence", "onset", "holds_to_end", "ratio_at_end"});
  bool all_hold = true;
  for (const auto& sc : scans) {
    w.cell(sc.name);
    w.cell(static_cast<double>(sc.onset));
    w.cell(std::string(sc.holds_to_end ? "1" : "0"));
    w.cell(sc.ratio_at_end);
    w.end_row();
    all_hold = all_hold && sc.holds_to_end;
  }
  man.add("appendix_onsets.csv");
  return all_hold ? 0 : 1;
}

}  // namespace

int run_experiment(const Config& cfg, const std::string& mode,
                   const std::string& out_dir) {
  fs::create_directories(out_dir);
  Manifest man;
  int rc = 0;
  try {
    if (mode == "run-ode") rc = mode_run_ode(cfg, out_dir, man);
    else if (mode == "run-ipga") rc = mode_run_ipga(cfg, out_dir, man);
    else if (mode == "compare") rc = mode_compare(cfg, out_dir, man);
    else if (mode == "predict") rc = mode_predict(cfg, out_dir, man);
    else if (mode == "audit") rc = mode_audit(cfg, out_dir, man);
    else if (mode == "check-appendix") rc = mode_check_appendix(cfg, out_dir, man);
    else throw ConfigError("unknown mode: " + mode);
  } catch (...) {
    man.write(out_dir);  // partial artifacts retained, marked incomplete
    throw;
  }
  man.complete = true;
  man.write(out_dir);
  return rc;
}

}  // namespace tikflow
