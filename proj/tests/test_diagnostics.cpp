#include <catch_amalgamated.hpp>

#include <random>

#include "support/oracles.hpp"

using namespace mnsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const Grid coarse(16.0, 16);

SpectralField3 unit_modes(std::mt19937_64& rng, double l2, int nmax = 3) {
  SpectralField3 f = oracle::random_modes(coarse, rng, nmax);
  f *= l2 / hs_norm(f, 0.0);
  return f;
}

SystemState random_state(std::mt19937_64& rng, double field, double speed) {
  std::normal_distribution<double> nd;
  ParticleState p;
  p.xi = Vec3(nd(rng), nd(rng), nd(rng));
  p.v = speed * Vec3(nd(rng), nd(rng), nd(rng)).normalized();
  return SystemState(EMState(unit_modes(rng, field), unit_modes(rng, field)), p);
}

}  // namespace

TEST_CASE("energy", "[energy]") {
  const Grid g(2.0 * std::numbers::pi, 8);
  SystemState u(g);
  CHECK(energy(u) == 0.0);
  u.particle.v = Vec3(1, 0, 0);
  CHECK(energy(u) == 0.5);
  u.particle.v.setZero();
  u.em.E.set_real(false);
  u.em.B.set_real(false);
  u.em.E.at(1, 0, 0) = Vec3c(Complex(0.3, 0.4), 0, 0);
  u.em.B.at(0, 1, 0) = Vec3c(0, 0, 2.0);
  CHECK_THAT(energy(u), WithinRel(0.5 * std::pow(2.0 * std::numbers::pi, 3) * (0.25 + 4.0), 1e-14));

  SystemState w(g);
  w.particle.v = Vec3(3, 0, 0);
  w.particle.m = 2.0;
  w.particle.I = 4.0;
  w.particle.omega = Vec3(0, 1, 0);
  CHECK(energy(w, ModelKind::newton) == 9.0);
  CHECK(energy(w, ModelKind::rotating) == 11.0);
  CHECK_THAT(energy(w, ModelKind::abraham), WithinRel(std::sqrt(10.0), 1e-15));
}

TEST_CASE("growth certificate", "[growth]") {
  GrowthCertificate c;
  c.u0_norm_sq = 2.5;
  c.t0 = 1.0;
  c.rate = growth_rate_homogeneous(1.0, std::sqrt(0.1), std::sqrt(0.1));
  CHECK_THAT(c.rate, WithinRel(1.9, 1e-15));
  CHECK(growth_bound(c, 1.0, 1.0) == 2.5);
  CHECK_THAT(growth_bound(c, 2.0, 1.0) / 2.5, WithinAbs(13.372, 1e-3));
  CHECK_THAT(growth_bound(c, 2.0, 1.0), WithinRel(2.0 * std::exp(1.9) * 2.5, 1e-15));
  CHECK(growth_bound(c, 0.0, 1.0) == growth_bound(c, 2.0, 1.0));

  GrowthCertificate free = c;
  free.rate = growth_rate_homogeneous(0.0, 1.0, 1.0);
  CHECK(free.rate == 0.0);
  CHECK_THAT(free.bound(4.0), WithinRel(10.0 * 2.5, 1e-15));

  // Monotone in |e|, the profile norms and |t - t0|.
  double prev = 0.0;
  for (double dt : {0.0, 0.1, 0.5, 2.0}) {
    const double b = c.bound(1.0 + dt);
    CHECK(b >= prev);
    prev = b;
  }
  CHECK(growth_rate_homogeneous(2.0, 0.3, 0.4) > growth_rate_homogeneous(1.0, 0.3, 0.4));
  CHECK(growth_rate_homogeneous(1.0, 0.5, 0.4) > growth_rate_homogeneous(1.0, 0.3, 0.4));
  CHECK(growth_rate_homogeneous(1.0, 0.3, 0.5) > growth_rate_homogeneous(1.0, 0.3, 0.4));
  CHECK(growth_rate_homogeneous(-1.0, 0.3, 0.4) == growth_rate_homogeneous(1.0, 0.3, 0.4));
  CHECK_THAT(growth_rate_nonhomogeneous(0.5, 2.0), WithinRel(0.5 * 37.0, 1e-15));

  const NormTable t = build_norm_table(ChargeProfile::gaussian(1.0, 1.0), 0.5, 1.0);
  SystemState u(coarse);
  u.particle.v = Vec3(1, 2, 2);
  const GrowthCertificate h = make_certificate(t, -2.0, u, 0.5, ModelKind::newton);
  CHECK(h.homogeneous);
  CHECK(h.index == 0.5);
  CHECK(h.u0_norm_sq == 9.0);
  CHECK_THAT(h.rate, WithinRel(growth_rate_homogeneous(2.0, t.plus_s, t.minus_s), 1e-15));
  const GrowthCertificate hr = make_certificate_hr(t, 1.0, u, 0.0, ModelKind::newton);
  CHECK_FALSE(hr.homogeneous);
  CHECK(hr.index == 1.0);
  CHECK_THAT(hr.rate, WithinRel(1.0 + 9.0 * t.h_r * t.h_r, 1e-15));
}

TEST_CASE("check_trajectory", "[check]") {
  std::mt19937_64 rng(71);
  SECTION("free run: energy exact and bound satisfied") {
    const ChargeProfile prof = ChargeProfile::gaussian(1.0, 0.0);
    const NormTable nt = build_norm_table(prof, 0.0);
    SolverSettings set;
    set.max_step = 0.25;
    const PicardSolver solver(ModelKind::newton, ProfileOnGrid(prof, coarse), nt.M, set);
    const SystemState u0 = random_state(rng, 1.0, 0.3);
    const Trajectory tr = solver.global_solve(u0, 0.0, 2.0);
    const TrajectoryReport r = check_trajectory(tr, make_certificate(nt, 0.0, u0, 0.0, ModelKind::newton), 0.0, 1e-12);
    CHECK(r.ok());
    CHECK(r.max_energy_drift <= 1e-12);
    CHECK(r.nodes == tr.size());
  }
  SECTION("coupled run and a corrupted copy") {
    const ChargeProfile prof = ChargeProfile::gaussian(1.0, 1.0);
    const NormTable nt = build_norm_table(prof, 0.0);
    const PicardSolver solver(ModelKind::newton, ProfileOnGrid(prof, coarse), nt.M, SolverSettings{});
    const SystemState u0 = random_state(rng, 0.3, 0.2);
    const Trajectory tr = solver.global_solve(u0, 0.0, 0.5);
    const GrowthCertificate cert = make_certificate(nt, 1.0, u0, 0.0, ModelKind::newton);
    const double tol = 100.0 * solver.settings().picard_tol * (1.0 + energy(u0));
    const TrajectoryReport r = check_trajectory(tr, cert, 0.0, tol);
    CHECK(r.ok());
    CHECK(r.worst_bound_ratio <= 1.0 + 1e-12);
    CHECK(r.violations.empty());

    Trajectory bad = tr;
    const std::size_t mid = bad.size() / 2;
    bad.states[mid].em *= 10.0;
    const TrajectoryReport rb = check_trajectory(bad, cert, 0.0, tol);
    CHECK_FALSE(rb.bound_ok);
    CHECK_FALSE(rb.energy_ok);
    CHECK_FALSE(rb.m_ok);
    CHECK_FALSE(rb.violations.empty());
    CHECK(rb.worst_bound_ratio > 1.0);
  }
  SECTION("energy is not checked away from s = 0") {
    const ChargeProfile prof = ChargeProfile::gaussian(1.0, 1.0);
    const NormTable nt = build_norm_table(prof, 0.5);
    Trajectory tr;
    const SystemState u0 = random_state(rng, 0.3, 0.2);
    tr.push(0.0, u0);
    SystemState u1 = u0;
    u1.particle.v *= 0.5;
    tr.push(0.1, u1);
    const TrajectoryReport r = check_trajectory(tr, make_certificate(nt, 1.0, u0, 0.0, ModelKind::newton), 0.5, 0.0);
    CHECK(r.energy_ok);
    CHECK(r.ok());
  }
}

TEST_CASE("lemma terms", "[lemma][oracle]") {
  std::mt19937_64 rng(73);
  const double e = 1.0;
  const ProfileOnGrid pg(ChargeProfile::gaussian(1.0, e), coarse);

  SECTION("identical pair") {
    const SystemState a = random_state(rng, 0.5, 0.3);
    const LemmaTerms L = lemma_terms(pg, a, a, 0.0, torus_norms(pg, 0.0));
    CHECK(L.X1 == 0.0);
    CHECK(L.X2 == 0.0);
    CHECK(L.X3 == 0.0);
    CHECK(L.ok());
  }
  SECTION("X1 at s = 0 matches the real-space L2 distance of the currents") {
    const SystemState a = random_state(rng, 0.5, 0.3), b = random_state(rng, 0.5, 0.3);
    const LemmaTerms L = lemma_terms(pg, a, b, 0.0, torus_norms(pg, 0.0));
    const SpectralField3 d = current_density(pg, b.particle.xi, b.particle.v) - current_density(pg, a.particle.xi, a.particle.v);
    CHECK_THAT(L.X1, WithinRel(oracle::l2_norm_sq(d) / (e * e), 1e-12));
  }
  SECTION("torus norms approach the whole-space norms") {
    const ProfileOnGrid fine(pg.profile(), Grid(16.0, 32));
    const TorusNorms t0 = torus_norms(fine, 0.0);
    const NormTable n0 = build_norm_table(pg.profile(), 0.0);
    CHECK_THAT(t0.plus_s, WithinRel(n0.plus_s, 1e-10));
    CHECK_THAT(t0.s_plus_one, WithinRel(n0.s_plus_one, 1e-10));
    // Odd powers of |k| have a cusp at k = 0, so the lattice sum converges slowly.
    const TorusNorms th = torus_norms(fine, 0.5);
    const NormTable nh = build_norm_table(pg.profile(), 0.5);
    CHECK_THAT(th.plus_s, WithinRel(nh.plus_s, 1e-3));
    CHECK_THAT(th.s_plus_one, WithinRel(nh.s_plus_one, 1e-3));
  }
  for (double s : {-0.5, 0.0, 1.0}) {
    DYNAMIC_SECTION("random pairs hold at s = " << s) {
      std::vector<SystemState> states;
      for (int i = 0; i < 40; ++i) states.push_back(random_state(rng, 1.0, 0.9));
      const LemmaSuiteReport r = lemma_inequality_suite(pg, states, s);
      CHECK(r.samples == 20);
      CHECK(r.ok());
      CHECK(r.worst_X1 <= 1.0);
      CHECK(r.worst_X2 <= 1.0);
      CHECK(r.worst_X3 <= 1.0);
      CHECK(r.worst_smear <= 1.0);
      CHECK(r.worst_X2 > 0.0);
    }
  }
}

TEST_CASE("smearing bound", "[lemma]") {
  std::mt19937_64 rng(75);
  const ProfileOnGrid pg(ChargeProfile::gaussian(1.0, 1.0), coarse);
  for (double s : {-0.5, 0.0, 0.5, 1.0}) {
    for (int i = 0; i < 10; ++i) {
      const SpectralField3 F = unit_modes(rng, 1.0, 5);
      const SmearingCheck c = smearing_check(pg, F, Vec3(0.1 * i, -0.2, 0.3), s);
      CHECK(c.ok());
      CHECK(c.value > 0.0);
    }
  }
  // The bound is attained (Cauchy-Schwarz equality) by the profile itself at s = 0.
  SpectralField3 F(coarse);
  for (std::size_t i = 0; i < coarse.size(); ++i)
    if (coarse.active(i) && i != Grid::zero_mode) F[i](0) = pg.phihat(i);
  const SmearingCheck c = smearing_check(pg, F, Vec3::Zero(), 0.0);
  CHECK_THAT(c.value, WithinRel(c.bound * std::sqrt(1.0 - std::pow(pg.phihat(Grid::zero_mode), 2) /
                                                           (coarse.volume() * std::pow(torus_profile_norm(pg, 0.0), 2))),
                                1e-10));
}

TEST_CASE("interaction-picture derivatives are second order", "[check][picard]") {
  // d/dt U(t0 - t) F(t) = U(t0 - t)(-j(t), 0) and d/dt v = f_em along a solution.
  std::mt19937_64 rng(77);
  const ChargeProfile prof = ChargeProfile::gaussian(1.0, 1.0);
  const ProfileOnGrid pg(prof, coarse);
  SolverSettings set;
  set.picard_tol = 1e-14;
  const PicardSolver solver(ModelKind::newton, pg, build_norm_table(prof, 0.0).M, set);
  const SystemState u0 = random_state(rng, 0.3, 0.3);
  const StepPlan plan = solver.plan(u0);
  const double t0 = 0.0, t = 0.6 * plan.eta * plan.T;
  auto at = [&](double t1) { return solver.solve_between(u0, t0, t1, plan).traj; };
  auto end_state = [&](double t1) {
    const Trajectory tr = at(t1);
    return tr.times.back() == t1 ? tr.states.back() : tr.states.front();
  };
  const SystemState mid = end_state(t);
  EMState src(coarse);
  src.E = current_for_model(ModelKind::newton, pg, mid.particle, true);
  src.E *= -1.0;
  const EMState target = apply_U(src, t0 - t);
  const Vec3 accel = lorentz_force(pg, mid.em, mid.particle.xi, mid.particle.v);

  auto residuals = [&](double dt) {
    const SystemState up = end_state(t + dt), dn = end_state(t - dt);
    EMState d = apply_U(up.em, t0 - t - dt) - apply_U(dn.em, t0 - t + dt);
    d *= 1.0 / (2.0 * dt);
    d -= target;
    const Vec3 dv = (up.particle.v - dn.particle.v) / (2.0 * dt) - accel;
    return std::pair{hs_norm(d, 0.0), dv.norm()};
  };
  const auto [f1, p1] = residuals(0.2 * t);
  const auto [f2, p2] = residuals(0.1 * t);
  CHECK_THAT(f1 / f2, WithinAbs(4.0, 0.2));
  CHECK_THAT(p1 / p2, WithinAbs(4.0, 0.2));
}
