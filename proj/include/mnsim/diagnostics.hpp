#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mnsim/growth.hpp"

namespace mnsim {

/// Conserved energy at s = 0.
///   newton:   (m |v|^2 + ||E||^2 + ||B||^2) / 2
///   abraham:  sqrt(1 + |p|^2) + (||E||^2 + ||B||^2) / 2
///   rotating: (m |v|^2 + I |Omega|^2 + ||E||^2 + ||B||^2) / 2
inline double energy(const SystemState& u, ModelKind model = ModelKind::newton) {
  const double field = 0.5 * hs_norm_sq(u.em, 0.0);
  const ParticleState& p = u.particle;
  switch (model) {
    case ModelKind::newton: return field + 0.5 * p.m * p.v.squaredNorm();
    case ModelKind::abraham: return field + std::sqrt(1.0 + p.v.squaredNorm());
    case ModelKind::rotating: return field + 0.5 * (p.m * p.v.squaredNorm() + p.I * p.omega.squaredNorm());
  }
  return field;
}

/// M(t) = (|v|^2 + ||E||^2_s + ||B||^2_s) / 2.
inline double lyapunov_m(const SystemState& u, double s) { return 0.5 * (u.particle.v.squaredNorm() + hs_norm_sq(u.em, s)); }

struct TrajectoryReport {
  std::size_t nodes = 0;
  double energy0 = 0.0;
  double max_energy_drift = 0.0;  // absolute
  double energy_tolerance = 0.0;
  bool energy_ok = true;
  double worst_bound_ratio = 0.0;  // max ||u||^2 / bound
  bool bound_ok = true;
  double worst_m_ratio = 0.0;      // max M(t_{i+1}) / (M(t_i) exp(rate dt))
  bool m_ok = true;
  std::vector<std::string> violations;

  bool ok() const { return energy_ok && bound_ok && m_ok; }
};

/// Checks energy drift (s = 0 only, against tol_energy), the growth bound at
/// every node, and the integrated form of dM/dt <= rate M between
/// consecutive nodes. Violations are reported, not thrown.
inline TrajectoryReport check_trajectory(const Trajectory& traj, const GrowthCertificate& cert, double s,
                                         double tol_energy = -1.0, double slack = 1e-12) {
  TrajectoryReport r;
  r.nodes = traj.size();
  if (traj.size() == 0) return r;
  const ModelKind model = traj.model;
  const bool check_energy = s == 0.0;
  if (check_energy) {
    r.energy0 = energy(traj.states.front(), model);
    r.energy_tolerance = tol_energy >= 0.0 ? tol_energy : 1e-8 * (1.0 + r.energy0);
  }
  double m_prev = lyapunov_m(traj.states.front(), s);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const SystemState& u = traj.states[i];
    const double t = traj.times[i];
    if (check_energy) {
      const double drift = std::abs(energy(u, model) - r.energy0);
      r.max_energy_drift = std::max(r.max_energy_drift, drift);
      if (drift > r.energy_tolerance) {
        if (r.energy_ok) r.violations.push_back("energy drift " + std::to_string(drift) + " at t = " + std::to_string(t));
        r.energy_ok = false;
      }
    }
    const double nrm = cert.state_norm_sq(u, model);
    const double bound = cert.bound(t);
    const double ratio = bound > 0.0 ? nrm / bound : (nrm > 0.0 ? INFINITY : 0.0);
    r.worst_bound_ratio = std::max(r.worst_bound_ratio, ratio);
    if (nrm > bound * (1.0 + slack)) {
      if (r.bound_ok) r.violations.push_back("growth bound exceeded at t = " + std::to_string(t));
      r.bound_ok = false;
    }
    if (i > 0) {
      const double m = lyapunov_m(u, s);
      const double dt = std::abs(t - traj.times[i - 1]);
      const double allowed = m_prev * std::exp(cert.rate * dt);
      const double mr = allowed > 0.0 ? m / allowed : (m > 0.0 ? INFINITY : 0.0);
      r.worst_m_ratio = std::max(r.worst_m_ratio, mr);
      if (m > allowed * (1.0 + slack) + 1e-300) {
        if (r.m_ok) r.violations.push_back("dM/dt <= rate M violated near t = " + std::to_string(t));
        r.m_ok = false;
      }
      m_prev = m;
    }
  }
  return r;
}

/// Terms of the difference estimate for two states and the right-hand
/// sides of their bounds (torus norms of the profile).
struct LemmaTerms {
  double X1 = 0.0, X1_bound = 0.0;
  double X2 = 0.0, X2_bound = 0.0;
  double X3 = 0.0, X3_bound = 0.0;
  bool ok() const { return X1 <= X1_bound && X2 <= X2_bound && X3 <= X3_bound; }
};

/// Profile constants needed by the lemma suite, computed on the grid.
struct TorusNorms {
  double minus_s = 0.0;
  double one_minus_s = 0.0;
  double plus_s = 0.0;
  double s_plus_one = 0.0;
};

inline TorusNorms torus_norms(const ProfileOnGrid& pg, double s) {
  return {torus_profile_norm(pg, -s), torus_profile_norm(pg, 1.0 - s), torus_profile_norm(pg, s),
          torus_profile_norm(pg, s + 1.0)};
}

/// X1 = ||v2 phi(xi2 - .) - v1 phi(xi1 - .)||^2_s (neutralized currents / e),
/// X2 = |(phi*E1)(xi1) - (phi*E2)(xi2)|^2,
/// X3 = |v1 x (phi*B1)(xi1) - v2 x (phi*B2)(xi2)|^2,
/// with the bounds of the contraction estimate. Relative slack rel absorbs
/// rounding.
inline LemmaTerms lemma_terms(const ProfileOnGrid& pg, const SystemState& a, const SystemState& b, double s,
                              const TorusNorms& tn, double rel = 1e-12) {
  LemmaTerms L;
  const Vec3 &xi1 = a.particle.xi, &xi2 = b.particle.xi;
  const Vec3 &v1 = a.particle.v, &v2 = b.particle.v;
  const double dv2 = (v1 - v2).squaredNorm();
  const double dxi2 = (xi1 - xi2).squaredNorm();
  const double vmax2 = std::max(v1.squaredNorm(), v2.squaredNorm());

  // X1 directly from the spectral coefficients of the two currents.
  const Grid& g = pg.grid();
  {
    PhaseTable p1(g, xi1, -1), p2(g, xi2, -1);
    const Vec3c c1 = v1.cast<Complex>(), c2 = v2.cast<Complex>();
    double acc = 0.0;
    const int N = g.modes_per_axis();
    for (int ix = 0; ix < N; ++ix)
      for (int iy = 0; iy < N; ++iy)
        for (int iz = 0; iz < N; ++iz) {
          const std::size_t i = g.flat(ix, iy, iz);
          if (!g.active(i)) continue;
          const double kn = g.knorm(i);
          if (kn < g.k_epsilon() && s != 0.0) continue;
          const double w = homogeneous_weight(kn, s);
          const Vec3c d = pg.phihat(i) * (p2(ix, iy, iz) * c2 - p1(ix, iy, iz) * c1);
          acc += w * d.squaredNorm();
        }
    L.X1 = acc / g.volume();
  }
  L.X1_bound = 2.0 * (dv2 * tn.plus_s * tn.plus_s + 3.0 * dxi2 * vmax2 * tn.s_plus_one * tn.s_plus_one);

  const Vec3 e1 = smeared_field(pg, a.em.E, xi1), e2 = smeared_field(pg, b.em.E, xi2);
  const Vec3 b1 = smeared_field(pg, a.em.B, xi1), b2 = smeared_field(pg, b.em.B, xi2);
  L.X2 = (e1 - e2).squaredNorm();
  const double E1 = hs_norm_sq(a.em.E, s), E2 = hs_norm_sq(b.em.E, s);
  const double dE = hs_norm_sq(a.em.E - b.em.E, s);
  L.X2_bound = 2.0 * (dxi2 * tn.one_minus_s * tn.one_minus_s * std::max(E1, E2) + tn.minus_s * tn.minus_s * dE);

  L.X3 = (v1.cross(b1) - v2.cross(b2)).squaredNorm();
  const double B1 = hs_norm_sq(a.em.B, s), B2 = hs_norm_sq(b.em.B, s);
  const double dB = hs_norm_sq(a.em.B - b.em.B, s);
  const double Bmax = std::max(B1, B2);
  L.X3_bound = 6.0 * (dv2 * tn.minus_s * tn.minus_s * Bmax + tn.minus_s * tn.minus_s * vmax2 * dB +
                      dxi2 * tn.one_minus_s * tn.one_minus_s * vmax2 * Bmax);

  L.X1_bound = L.X1_bound * (1.0 + rel) + 1e-300;
  L.X2_bound = L.X2_bound * (1.0 + rel) + 1e-300;
  L.X3_bound = L.X3_bound * (1.0 + rel) + 1e-300;
  return L;
}

/// |(phi*F)(x)| and its bound ||phi||_{Hdot^-s} ||F||_{Hdot^s} (torus norms).
struct SmearingCheck {
  double value = 0.0;
  double bound = 0.0;
  bool ok() const { return value <= bound; }
};

inline SmearingCheck smearing_check(const ProfileOnGrid& pg, const SpectralField3& F, const Vec3& x, double s,
                                    double rel = 1e-12) {
  SmearingCheck c;
  c.value = smeared_field(pg, F, x).norm();
  c.bound = torus_profile_norm(pg, -s) * hs_norm(F, s) * (1.0 + rel) + 1e-300;
  return c;
}

struct LemmaSuiteReport {
  std::size_t samples = 0;
  std::size_t failures = 0;
  double worst_X1 = 0.0, worst_X2 = 0.0, worst_X3 = 0.0, worst_smear = 0.0;  // max value / bound
  bool ok() const { return failures == 0; }
};

/// Runs lemma_terms over consecutive pairs and smearing_check at each
/// state's particle position.
inline LemmaSuiteReport lemma_inequality_suite(const ProfileOnGrid& pg, const std::vector<SystemState>& states,
                                               double s) {
  LemmaSuiteReport r;
  const TorusNorms tn = torus_norms(pg, s);
  auto ratio = [](double v, double b) { return b > 0.0 ? v / b : 0.0; };
  for (std::size_t i = 0; i + 1 < states.size(); i += 2) {
    const LemmaTerms L = lemma_terms(pg, states[i], states[i + 1], s, tn);
    r.worst_X1 = std::max(r.worst_X1, ratio(L.X1, L.X1_bound));
    r.worst_X2 = std::max(r.worst_X2, ratio(L.X2, L.X2_bound));
    r.worst_X3 = std::max(r.worst_X3, ratio(L.X3, L.X3_bound));
    ++r.samples;
    if (!L.ok()) ++r.failures;
    for (const SystemState* u : {&states[i], &states[i + 1]})
      for (const SpectralField3* F : {&u->em.E, &u->em.B}) {
        const SmearingCheck c = smearing_check(pg, *F, u->particle.xi, s);
        r.worst_smear = std::max(r.worst_smear, ratio(c.value, c.bound));
        if (!c.ok()) ++r.failures;
      }
  }
  return r;
}

}  // namespace mnsim
