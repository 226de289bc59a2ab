#pragma once

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mnsim/config.hpp"
#include "mnsim/constraints.hpp"
#include "mnsim/diagnostics.hpp"
#include "mnsim/picard.hpp"
#include "mnsim/random_fields.hpp"
#include "mnsim/reference_oracle.hpp"
#include "mnsim/state_file.hpp"

namespace mnsim {

/// Everything derived from a configuration before time stepping.
struct RunContext {
  RunConfig cfg;
  ModelKind model;
  Grid grid;
  ProfileOnGrid pg;
  NormTable norms;

  static ChargeProfile make_profile(const RunConfig& c) {
    if (c.profile.shape == "gaussian") return ChargeProfile::gaussian(c.profile.sigma, c.profile.e, c.profile.normalize);
    return ChargeProfile::tabulated(c.profile.table, c.profile.e);
  }

  explicit RunContext(const RunConfig& c)
      : cfg(c),
        model(c.model_kind()),
        grid(c.grid.L, c.grid.N),
        pg(make_profile(c), grid),
        norms(build_norm_table(pg.profile(), c.solver.s, 0.0, model == ModelKind::rotating,
                               grid.k_min() * grid.modes_per_axis())) {
    require_model_support(model, pg);
  }

  SolverSettings solver_settings() const {
    SolverSettings s;
    s.s = cfg.solver.s;
    s.eta = cfg.solver.eta;
    s.picard_tol = cfg.solver.picard_tol;
    s.max_iter = cfg.solver.max_iter;
    s.q = cfg.solver.q;
    s.max_step = cfg.solver.max_step;
    s.min_step = cfg.solver.min_step;
    s.breakpoint_origin = cfg.solver.t0;
    s.breakpoint_cadence = cfg.output.cadence;
    s.keep_states = false;
    return s;
  }

  PicardSolver solver() const { return PicardSolver(model, pg, norms.M, solver_settings()); }
};

/// Initial state described by the config. seed overrides the random-field
/// seed when given.
inline SystemState initial_state(const RunContext& ctx, std::optional<std::uint64_t> seed = std::nullopt) {
  const RunConfig& c = ctx.cfg;
  ParticleState p;
  p.xi = c.initial.xi;
  p.v = c.initial.v;
  p.omega = c.initial.omega;
  p.m = c.model.m;
  p.I = c.model.I;
  validate_particle(ctx.model, p);
  const FieldSpec& f = c.initial.field;
  EMState em(ctx.grid);
  if (f.type == "plane_wave") {
    em = plane_wave(ctx.grid, Eigen::Vector3i(f.n[0], f.n[1], f.n[2]), f.pol, f.amp);
  } else if (f.type == "random") {
    std::mt19937_64 rng(seed.value_or(f.seed));
    RandomFieldSpec spec;
    spec.l2_norm = f.l2_norm;
    spec.k0 = f.k0;
    em = random_em_state(ctx.grid, rng, spec);
  } else if (f.type == "file") {
    DecodedState d = read_state_file(f.path);
    if (d.state.grid() != ctx.grid) throw ConfigError("initial.field.path: state file grid differs from grid");
    em = d.state.em;
  }
  if (c.initial.admissible) em = make_admissible(em.E, em.B, ctx.pg, p.xi);
  SystemState u(std::move(em), p);
  if (c.solver.s < 0.0 && (!has_zero_mean(u.em.E) || !has_zero_mean(u.em.B)))
    throw ConfigError("solver.s: negative s needs mean-zero initial fields");
  return u;
}

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::string> resume;
  std::optional<std::uint64_t> seed;
  std::optional<double> s;
  bool quiet = false;
};

struct RunSummary {
  int exit_code = 0;
  std::string status = "ok";
  std::string message;
  double t_start = 0.0;
  double t_final = 0.0;
  std::size_t steps = 0;
  std::size_t nodes = 0;
  double max_energy_drift = 0.0;
  double energy_tolerance = 0.0;
  double worst_bound_ratio = 0.0;
  double max_gauss_E = 0.0;
  double max_gauss_B = 0.0;
  double max_continuity = 0.0;
  std::vector<std::string> checkpoints;
};

namespace run_detail {

inline std::string fmt(double x) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", x);
  return b;
}

inline Json norm_table_json(const NormTable& t) {
  Json entries = Json::array();
  for (const auto& e : t.entries)
    entries.push_back({{"space", e.space}, {"value", e.value}, {"error_bound", e.error_bound}});
  return {{"s", t.s}, {"r", t.r}, {"M", t.M}, {"entries", entries}};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

inline std::string checkpoint_name(long k) {
  char b[64];
  std::snprintf(b, sizeof b, "checkpoint_%05ld.mnstate", k);
  return b;
}

}  // namespace run_detail

/// Applies command-line overrides to a parsed config.
inline RunConfig apply_overrides(RunConfig c, const RunOptions& o) {
  if (o.out_dir) c.output.directory = *o.out_dir;
  if (o.s) c.solver.s = *o.s;
  if (o.seed) c.initial.field.seed = *o.seed;
  validate_config(c);
  return c;
}

/// Runs the configured simulation and writes manifest.json,
/// timeseries.csv and checkpoints into the output directory.
inline RunSummary run(const RunConfig& config, const RunOptions& opts = {}) {
  namespace fs = std::filesystem;
  const RunConfig cfg = apply_overrides(config, opts);
  const RunContext ctx(cfg);
  const fs::path dir = cfg.output.directory;
  fs::create_directories(dir);

  RunSummary sum;
  Json resume_info = nullptr;
  double t0 = cfg.solver.t0;
  std::optional<SystemState> start;
  if (opts.resume) {
    DecodedState d = read_state_file(*opts.resume);
    std::string mismatch;
    if (d.state.grid().length() != ctx.grid.length())
      mismatch += "grid.L: checkpoint " + run_detail::fmt(d.state.grid().length()) + " vs config " +
                  run_detail::fmt(ctx.grid.length()) + "; ";
    if (d.state.grid().modes_per_axis() != ctx.grid.modes_per_axis())
      mismatch += "grid.N: checkpoint " + std::to_string(d.state.grid().modes_per_axis()) + " vs config " +
                  std::to_string(ctx.grid.modes_per_axis()) + "; ";
    if (d.meta.model != ctx.model)
      mismatch += "model.tag: checkpoint " + model_name(d.meta.model) + " vs config " + model_name(ctx.model) + "; ";
    if (d.state.particle.m != cfg.model.m) mismatch += "model.m differs; ";
    if (ctx.model == ModelKind::rotating && d.state.particle.I != cfg.model.I) mismatch += "model.I differs; ";
    if (!mismatch.empty()) throw ConfigError("resume: checkpoint does not match config: " + mismatch);
    t0 = d.meta.time;
    resume_info = {{"checkpoint", *opts.resume}, {"time", d.meta.time}, {"checkpoint_s", d.meta.s}};
    start = std::move(d.state);
  } else {
    start = initial_state(ctx, opts.seed);
  }
  const SystemState& u0 = *start;
  const double t_end = cfg.solver.t_end;
  sum.t_start = t0;

  const PicardSolver solver = ctx.solver();
  const GrowthCertificate cert = make_certificate(ctx.norms, ctx.pg.charge(), u0, t0, ctx.model);
  const double s = cfg.solver.s;
  const double e0 = energy(u0, ctx.model);
  sum.energy_tolerance = 100.0 * cfg.solver.picard_tol * (1.0 + e0);

  std::ofstream csv(dir / "timeseries.csv", std::ios::trunc);
  if (!csv) throw Error("cannot write timeseries.csv");
  csv << "t,xi_x,xi_y,xi_z," << (ctx.model == ModelKind::abraham ? "p_x,p_y,p_z" : "v_x,v_y,v_z");
  if (ctx.model == ModelKind::rotating) csv << ",omega_x,omega_y,omega_z";
  csv << ",energy,xs_norm_sq,bound,gauss_E,gauss_B,continuity,step,iterations\n";

  std::size_t step_index = 0;
  auto emit = [&](double t, const SystemState& u, const StepRecord& rec) {
    const ConstraintReport cr = constraint_report(u, ctx.model, ctx.pg, s, t);
    const double en = energy(u, ctx.model);
    const double nrm = xs_norm_sq(u, s, ctx.model);
    const double bnd = cert.bound(t);
    const ParticleState& p = u.particle;
    csv << run_detail::fmt(t);
    for (int i = 0; i < 3; ++i) csv << ',' << run_detail::fmt(p.xi[i]);
    for (int i = 0; i < 3; ++i) csv << ',' << run_detail::fmt(p.v[i]);
    if (ctx.model == ModelKind::rotating)
      for (int i = 0; i < 3; ++i) csv << ',' << run_detail::fmt(p.omega[i]);
    csv << ',' << run_detail::fmt(en) << ',' << run_detail::fmt(nrm) << ',' << run_detail::fmt(bnd) << ','
        << run_detail::fmt(cr.gauss_E) << ',' << run_detail::fmt(cr.gauss_B) << ',' << run_detail::fmt(cr.continuity)
        << ',' << step_index << ',' << rec.iterations << '\n';
    ++sum.nodes;
    sum.max_energy_drift = std::max(sum.max_energy_drift, std::abs(en - e0));
    sum.worst_bound_ratio = std::max(sum.worst_bound_ratio, bnd > 0.0 ? nrm / bnd : 0.0);
    sum.max_gauss_E = std::max(sum.max_gauss_E, cr.gauss_E);
    sum.max_gauss_B = std::max(sum.max_gauss_B, cr.gauss_B);
    sum.max_continuity = std::max(sum.max_continuity, cr.continuity);
  };
  emit(t0, u0, StepRecord{});

  auto save = [&](const std::string& name, double t, const SystemState& u) {
    StateFile meta;
    meta.model = ctx.model;
    meta.s = s;
    meta.time = t;
    write_state_file((dir / name).string(), u, meta);
    sum.checkpoints.push_back(name);
  };

  SystemState last = u0;
  double t_last = t0;
  Json steps = Json::array();
  try {
    // Stream nodes; endpoints that fall on the cadence lattice become checkpoints.
    double cur_start = std::numeric_limits<double>::quiet_NaN();
    auto observer = [&](double t, const SystemState& u, const StepRecord& rec) {
      if (!(rec.t_start == cur_start)) {
        ++step_index;
        cur_start = rec.t_start;
      }
      if (t == t0) return;
      emit(t, u, rec);
      if (t == rec.t_end) {
        last = u;
        t_last = t;
        steps.push_back({{"t_start", rec.t_start}, {"t_end", rec.t_end}, {"rho", rec.rho}, {"T", rec.T},
                         {"iterations", rec.iterations}, {"residual", rec.residual},
                         {"contraction_estimate", rec.contraction_estimate}});
        if (cfg.output.cadence > 0.0) {
          const double k = (t - cfg.solver.t0) / cfg.output.cadence;
          if (std::abs(k - std::round(k)) < 1e-9 && t != t0)
            save(run_detail::checkpoint_name(std::lround(k)), t, u);
        }
      }
    };
    const Trajectory tr = solver.global_solve(u0, t0, t_end, observer, &ctx.norms);
    sum.steps = tr.steps.size();
    sum.t_final = tr.times.back();
    last = tr.back();
  } catch (const IntegrityError& e) {
    sum.exit_code = 3;
    sum.status = "integrity_failure";
    sum.message = e.what();
    sum.t_final = t_last;
  } catch (const ConvergenceError& e) {
    sum.exit_code = 4;
    sum.status = "convergence_failure";
    sum.message = e.what();
    sum.t_final = t_last;
  }
  csv.close();
  save("final.mnstate", sum.t_final, last);

  const bool energy_checked = s == 0.0;
  const bool energy_ok = !energy_checked || sum.max_energy_drift <= sum.energy_tolerance;
  Json manifest;
  manifest["format"] = "mnsim-run-manifest";
  manifest["version"] = 1;
  manifest["config"] = config_to_json(cfg);
  manifest["resume"] = resume_info;
  manifest["model"] = model_name(ctx.model);
  manifest["norm_table"] = run_detail::norm_table_json(ctx.norms);
  manifest["certificate"] = {{"t0", cert.t0}, {"u0_norm_sq", cert.u0_norm_sq}, {"rate", cert.rate},
                             {"monitor_safety", solver.settings().monitor_safety}};
  manifest["steps"] = steps;
  manifest["summary"] = {{"status", sum.status},
                         {"message", sum.message},
                         {"t_start", sum.t_start},
                         {"t_final", sum.t_final},
                         {"steps", sum.steps},
                         {"nodes", sum.nodes},
                         {"energy0", e0},
                         {"max_energy_drift", sum.max_energy_drift},
                         {"energy_tolerance", sum.energy_tolerance},
                         {"energy_checked", energy_checked},
                         {"energy_ok", energy_ok},
                         {"worst_bound_ratio", sum.worst_bound_ratio},
                         {"max_gauss_E", sum.max_gauss_E},
                         {"max_gauss_B", sum.max_gauss_B},
                         {"max_continuity", sum.max_continuity},
                         {"checkpoints", sum.checkpoints}};
  run_detail::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return sum;
}

/// One row of the oracle comparison table.
struct OracleRow {
  double t = 0.0;
  double x0_distance = 0.0;
  double dxi = 0.0;
  double dv = 0.0;
  double dfield = 0.0;
};

/// Integrates with the Picard solver and the reference oracle, comparing
/// them at `samples` equally spaced times.
inline std::vector<OracleRow> compare_oracle(const RunContext& ctx, const SystemState& u0, double t0, double t_end,
                                             int samples = 10) {
  if (samples < 1) samples = 1;
  const PicardSolver solver = ctx.solver();
  OracleConfig oc;
  oc.dt = ctx.cfg.oracle.dt;
  oc.order = ctx.cfg.oracle.order;
  const ReferenceOracle oracle(ctx.model, ctx.pg, oc);
  std::vector<OracleRow> rows;
  SystemState a = u0, b = u0;
  double t = t0;
  for (int k = 1; k <= samples; ++k) {
    const double tn = k == samples ? t_end : t0 + (t_end - t0) * k / samples;
    a = solver.global_solve(a, t, tn).back();
    b = oracle.solve(b, t, tn).back();
    OracleRow r;
    r.t = tn;
    r.x0_distance = xs_distance(a, b, 0.0, ctx.model);
    r.dxi = (a.particle.xi - b.particle.xi).norm();
    r.dv = (a.particle.v - b.particle.v).norm();
    r.dfield = std::sqrt(hs_norm_sq(a.em - b.em, 0.0));
    rows.push_back(r);
    t = tn;
  }
  return rows;
}

/// Projects the fields of a stored state onto the constraint set in place and
/// appends a line with the residuals before and after to residuals.csv in
/// out_dir.
inline std::pair<ConstraintReport, ConstraintReport> admissibilize_file(const RunContext& ctx,
                                                                        const std::string& path,
                                                                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  DecodedState d = read_state_file(path);
  if (d.state.grid() != ctx.grid) throw ConfigError("admissibilize: state file grid differs from grid");
  const double s = d.meta.s;
  const ConstraintReport before = constraint_report(d.state, d.meta.model, ctx.pg, s, d.meta.time);
  d.state.em = make_admissible(d.state.em.E, d.state.em.B, ctx.pg, d.state.particle.xi);
  const ConstraintReport after = constraint_report(d.state, d.meta.model, ctx.pg, s, d.meta.time);
  write_state_file(path, d.state, d.meta);
  fs::create_directories(out_dir);
  const fs::path log = fs::path(out_dir) / "residuals.csv";
  const bool fresh = !fs::exists(log);
  std::ofstream out(log, std::ios::app);
  if (!out) throw Error("cannot write " + log.string());
  if (fresh) out << "t,stage,gauss_E,gauss_B,continuity,gauss_E_s,gauss_B_s,background\n";
  for (const auto& [stage, r] : {std::pair{"before", before}, std::pair{"after", after}})
    out << run_detail::fmt(r.t) << ',' << stage << ',' << run_detail::fmt(r.gauss_E) << ','
        << run_detail::fmt(r.gauss_B) << ',' << run_detail::fmt(r.continuity) << ',' << run_detail::fmt(r.gauss_E_s)
        << ',' << run_detail::fmt(r.gauss_B_s) << ',' << run_detail::fmt(r.background) << '\n';
  return {before, after};
}

/// Result of re-checking a finished run directory.
struct RunCheck {
  std::size_t rows = 0;
  double max_energy_drift = 0.0;
  double energy_tolerance = 0.0;
  bool energy_checked = false;
  double worst_bound_ratio = 0.0;
  double gauss_E0 = 0.0;
  double gauss_B0 = 0.0;
  double max_gauss_E = 0.0;
  double max_gauss_B = 0.0;
  double max_continuity = 0.0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Diagnostics over a stored trajectory: reads manifest.json and
/// timeseries.csv from dir and checks energy drift (s = 0), the growth bound
/// at every row and constraint propagation.
inline RunCheck check_run(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw FormatError("check: no manifest.json in " + dir);
  const Json manifest = Json::parse(mf, nullptr, false);
  if (manifest.is_discarded()) throw FormatError("check: manifest.json is not valid JSON");
  const RunConfig cfg = config_from_json(manifest.at("config"));
  std::ifstream ts(fs::path(dir) / "timeseries.csv");
  if (!ts) throw FormatError("check: no timeseries.csv in " + dir);
  std::string line;
  std::getline(ts, line);
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) head.push_back(c);
  }
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return i;
    throw FormatError("check: timeseries.csv lacks column " + name);
  };
  const std::size_t ci_t = col("t"), ci_e = col("energy"), ci_n = col("xs_norm_sq"), ci_b = col("bound"),
                    ci_ge = col("gauss_E"), ci_gb = col("gauss_B"), ci_c = col("continuity");
  RunCheck r;
  r.energy_checked = cfg.solver.s == 0.0;
  double e0 = 0.0;
  while (std::getline(ts, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) v.push_back(std::stod(c));
    if (v.size() != head.size()) throw FormatError("check: ragged row in timeseries.csv");
    if (r.rows == 0) {
      e0 = v[ci_e];
      r.energy_tolerance = 100.0 * cfg.solver.picard_tol * (1.0 + e0);
      r.gauss_E0 = v[ci_ge];
      r.gauss_B0 = v[ci_gb];
    }
    ++r.rows;
    r.max_energy_drift = std::max(r.max_energy_drift, std::abs(v[ci_e] - e0));
    if (v[ci_b] > 0.0) r.worst_bound_ratio = std::max(r.worst_bound_ratio, v[ci_n] / v[ci_b]);
    if (v[ci_n] > v[ci_b] * (1.0 + 1e-12))
      r.violations.push_back("growth bound exceeded at t = " + run_detail::fmt(v[ci_t]));
    r.max_gauss_E = std::max(r.max_gauss_E, v[ci_ge]);
    r.max_gauss_B = std::max(r.max_gauss_B, v[ci_gb]);
    r.max_continuity = std::max(r.max_continuity, v[ci_c]);
  }
  if (r.rows == 0) throw FormatError("check: timeseries.csv has no rows");
  if (r.energy_checked && r.max_energy_drift > r.energy_tolerance)
    r.violations.push_back("energy drift " + run_detail::fmt(r.max_energy_drift) + " exceeds " +
                           run_detail::fmt(r.energy_tolerance));
  if (r.max_gauss_E > 10.0 * r.gauss_E0 + 1e-10) r.violations.push_back("gauss_E residual grew");
  if (r.max_gauss_B > 10.0 * r.gauss_B0 + 1e-10) r.violations.push_back("gauss_B residual grew");
  if (r.max_continuity > 1e-12) r.violations.push_back("continuity residual above 1e-12");
  return r;
}

}  // namespace mnsim
