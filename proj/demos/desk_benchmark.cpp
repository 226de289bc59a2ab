// Coupled Newton run on the desk grid: energy, growth bound and constraint
// residuals at every step endpoint.
#include <cstdio>

#include "mnsim/mnsim.hpp"

using namespace mnsim;

int main() {
  const Grid g(16.0, 32);
  const ProfileOnGrid pg(ChargeProfile::gaussian(1.0, 1.0), g);
  const NormTable norms = build_norm_table(pg.profile(), 0.0);

  ParticleState p;
  p.v = Vec3(0.1, 0.05, 0.0);
  EMState wave = plane_wave(g, Eigen::Vector3i(1, 0, 0), Vec3(0, 1, 0), 0.005);
  SystemState u0(make_admissible(wave.E, wave.B, pg, p.xi), p);

  SolverSettings set;
  const PicardSolver solver(ModelKind::newton, pg, norms.M, set);
  const StepPlan plan = solver.plan(u0);
  std::printf("M = %.6f  rho = %.6f  T = %.6f\n", norms.M, plan.rho, plan.T);

  const Trajectory tr = solver.global_solve(u0, 0.0, 2.0, {}, &norms);
  const GrowthCertificate cert = make_certificate(norms, pg.charge(), u0, 0.0, ModelKind::newton);
  const double e0 = energy(u0);
  std::printf("%10s %22s %12s %12s %12s %5s\n", "t", "energy", "drift", "norm/bound", "gauss_E", "iter");
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const SystemState& u = tr.states[i];
    const double t = tr.times[i];
    const ConstraintReport cr = constraint_report(u, ModelKind::newton, pg, 0.0, t);
    const int it = i == 0 ? 0 : tr.steps[i - 1].iterations;
    std::printf("%10.6f %22.15f %12.3e %12.6f %12.3e %5d\n", t, energy(u), energy(u) - e0,
                xs_norm_sq(u, 0.0, ModelKind::newton) / cert.bound(t), cr.gauss_E, it);
  }
  const TrajectoryReport rep = check_trajectory(tr, cert, 0.0, 100.0 * set.picard_tol * (1.0 + e0));
  std::printf("certificate checks: %s\n", rep.ok() ? "pass" : "FAIL");
  return rep.ok() ? 0 : 1;
}
