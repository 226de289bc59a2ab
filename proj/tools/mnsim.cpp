// Command-line front end: run, admissibilize, compare-oracle, check, norms.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mnsim/mnsim.hpp"

namespace {

mnsim::RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mnsim::ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return mnsim::parse_config(ss.str());
}

void print_norms(const mnsim::NormTable& t) {
  std::printf("%-28s %-24s %s\n", "space", "norm", "tail bound");
  for (const auto& e : t.entries) std::printf("%-28s %-24.17g %.3g\n", e.space.c_str(), e.value, e.error_bound);
  std::printf("M = %.17g\n", t.M);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maxwell-Newton field-particle simulator"};
  app.require_subcommand(1);
  std::string config_path, out_dir, resume, state_path;
  std::uint64_t seed = 0;
  double s_override = 0.0;
  int samples = 10;

  auto add_common = [&](CLI::App* c, bool need_config) {
    auto* o = c->add_option("--config", config_path, "run configuration (JSON)");
    if (need_config) o->required();
    c->add_option("--out", out_dir, "output directory");
    c->add_option("--seed", seed, "seed for random-field initial conditions");
    c->add_option("--s", s_override, "Sobolev index of the run");
  };

  auto* run = app.add_subcommand("run", "integrate a configured run");
  add_common(run, true);
  run->add_option("--resume", resume, "continue from a checkpoint state file");

  auto* adm = app.add_subcommand("admissibilize", "project a stored state onto the constraint set in place");
  add_common(adm, true);
  adm->add_option("state", state_path, "state file")->required();

  auto* cmp = app.add_subcommand("compare-oracle", "compare the Picard solver with the reference oracle");
  add_common(cmp, true);
  cmp->add_option("--samples", samples, "number of comparison times");

  auto* chk = app.add_subcommand("check", "diagnostics over a stored run directory");
  chk->add_option("dir", out_dir, "run output directory")->required();

  auto* nrm = app.add_subcommand("norms", "print the profile norm table");
  add_common(nrm, true);

  CLI11_PARSE(app, argc, argv);

  try {
    mnsim::RunOptions opts;
    if (!out_dir.empty()) opts.out_dir = out_dir;
    if (!resume.empty()) opts.resume = resume;
    if (app.got_subcommand("run") || app.got_subcommand("admissibilize") || app.got_subcommand("compare-oracle") ||
        app.got_subcommand("norms")) {
      auto* sub = app.get_subcommands().front();
      if (sub->count("--seed")) opts.seed = seed;
      if (sub->count("--s")) opts.s = s_override;
    }

    if (run->parsed()) {
      const mnsim::RunSummary r = mnsim::run(load_config(config_path), opts);
      std::printf("status %s  t = %.17g  steps %zu  nodes %zu\n", r.status.c_str(), r.t_final, r.steps, r.nodes);
      std::printf("max energy drift %.3e (tolerance %.3e)  worst bound ratio %.6f\n", r.max_energy_drift,
                  r.energy_tolerance, r.worst_bound_ratio);
      std::printf("max residuals: gauss_E %.3e  gauss_B %.3e  continuity %.3e\n", r.max_gauss_E, r.max_gauss_B,
                  r.max_continuity);
      if (!r.message.empty()) std::fprintf(stderr, "%s\n", r.message.c_str());
      return r.exit_code;
    }

    if (chk->parsed()) {
      const mnsim::RunCheck r = mnsim::check_run(out_dir);
      std::printf("rows %zu  worst bound ratio %.6f\n", r.rows, r.worst_bound_ratio);
      if (r.energy_checked)
        std::printf("energy drift %.3e (tolerance %.3e)\n", r.max_energy_drift, r.energy_tolerance);
      std::printf("gauss_E %.3e (initial %.3e)  gauss_B %.3e (initial %.3e)  continuity %.3e\n", r.max_gauss_E,
                  r.gauss_E0, r.max_gauss_B, r.gauss_B0, r.max_continuity);
      for (const auto& v : r.violations) std::printf("VIOLATION %s\n", v.c_str());
      return r.ok() ? 0 : 3;
    }

    const mnsim::RunConfig cfg = mnsim::apply_overrides(load_config(config_path), opts);
    if (nrm->parsed()) {
      const mnsim::RunContext ctx(cfg);
      print_norms(ctx.norms);
      return 0;
    }
    if (adm->parsed()) {
      const mnsim::RunContext ctx(cfg);
      const auto [before, after] = mnsim::admissibilize_file(ctx, state_path, cfg.output.directory);
      std::printf("gauss_E %.3e -> %.3e  gauss_B %.3e -> %.3e  background %.17g\n", before.gauss_E, after.gauss_E,
                  before.gauss_B, after.gauss_B, after.background);
      return 0;
    }
    if (cmp->parsed()) {
      const mnsim::RunContext ctx(cfg);
      const mnsim::SystemState u0 = mnsim::initial_state(ctx, opts.seed);
      const auto rows = mnsim::compare_oracle(ctx, u0, cfg.solver.t0, cfg.solver.t_end, samples);
      std::printf("%-12s %-12s %-12s %-12s %-12s\n", "t", "X0 dist", "|dxi|", "|dv|", "|dfield|");
      for (const auto& r : rows)
        std::printf("%-12.6g %-12.4e %-12.4e %-12.4e %-12.4e\n", r.t, r.x0_distance, r.dxi, r.dv, r.dfield);
      return 0;
    }
  } catch (const mnsim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const mnsim::FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return 5;
  } catch (const mnsim::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
