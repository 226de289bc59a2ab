// Abraham and rotating-charge runs side by side with the reference oracle.
#include <cstdio>

#include "mnsim/mnsim.hpp"

using namespace mnsim;

namespace {

void run(ModelKind model, const ProfileOnGrid& pg, const SystemState& u0, double t_end) {
  const NormTable norms = build_norm_table(pg.profile(), 0.0, 0.0, model == ModelKind::rotating);
  SolverSettings set;
  set.keep_states = false;
  const PicardSolver solver(model, pg, norms.M, set);
  double vmax = 0.0;
  auto obs = [&](double, const SystemState& u, const StepRecord&) {
    vmax = std::max(vmax, particle_velocity(model, u.particle).norm());
  };
  const Trajectory tr = solver.global_solve(u0, 0.0, t_end, obs, &norms);
  OracleConfig oc;
  const Trajectory ref = reference_solve(model, pg, u0, 0.0, t_end, oc);
  const SystemState& a = tr.back();
  std::printf("%-9s steps %3zu  max |xi'| %.6f  |omega| %.3e  energy drift %.3e  oracle X0 dist %.3e\n",
              model_name(model).c_str(), tr.steps.size(), vmax, a.particle.omega.norm(),
              energy(a, model) - energy(u0, model), xs_distance(a, ref.back(), 0.0, model));
}

}  // namespace

int main() {
  const Grid g(16.0, 32);
  const ProfileOnGrid pg(ChargeProfile::gaussian(1.0, 1.0), g);

  ParticleState p;
  p.v = Vec3(3.0, 0.0, 0.0);
  EMState wave = plane_wave(g, Eigen::Vector3i(0, 1, 0), Vec3(1, 0, 0), 0.05);
  run(ModelKind::abraham, pg, SystemState(make_admissible(wave.E, wave.B, pg, p.xi), p), 1.0);

  ParticleState q;
  q.v = Vec3(0.05, 0.0, 0.0);
  q.omega = Vec3(0.0, 0.0, 0.2);
  std::mt19937_64 rng(7);
  RandomFieldSpec spec;
  spec.l2_norm = 0.05;
  spec.k0 = 0.8;
  EMState rnd = random_em_state(g, rng, spec);
  run(ModelKind::rotating, pg, SystemState(make_admissible(rnd.E, rnd.B, pg, q.xi), q), 1.0);
  return 0;
}
