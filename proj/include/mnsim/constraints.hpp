#pragma once

#include <cmath>

#include "mnsim/system_state.hpp"

namespace mnsim {

/// Longitudinal field of the charge against a uniform neutralizing
/// background: E_hat = -i k rho_hat / |k|^2 for k != 0, so that
/// div E = rho - mean(rho) exactly.
inline SpectralField3 coulomb_field(const ProfileOnGrid& pg, const Vec3& xi) {
  const Grid& g = pg.grid();
  const ScalarField rho = charge_density(pg, xi);
  SpectralField3 E(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const double kn = g.knorm(i);
    if (kn < g.k_epsilon()) continue;
    E[i] = (Complex(0.0, -1.0) * rho[i](0) / (kn * kn)) * g.k(i).cast<Complex>();
  }
  E.symmetrize();
  return E;
}

/// Box mean of the charge density, i.e. the neutralizing background.
inline double background_density(const ProfileOnGrid& pg) {
  return pg.charge() * pg.phihat(Grid::zero_mode) / pg.grid().volume();
}

/// Divergence-free parts of the raw fields plus the Coulomb field of the
/// charge at xi.
inline EMState make_admissible(const SpectralField3& E_raw, const SpectralField3& B_raw, const ProfileOnGrid& pg,
                               const Vec3& xi) {
  E_raw.check_same_grid(B_raw);
  if (E_raw.grid() != pg.grid()) throw DomainError("make_admissible: profile and fields on different grids");
  SpectralField3 E = helmholtz_project(E_raw).div_free;
  E += coulomb_field(pg, xi);
  E.symmetrize();
  SpectralField3 B = helmholtz_project(B_raw).div_free;
  B.symmetrize();
  return EMState(std::move(E), std::move(B));
}

struct ConstraintReport {
  double t = 0.0;
  double gauss_E = 0.0;       // ||div E - (rho - mean rho)||, L2
  double gauss_B = 0.0;       // ||div B||, L2
  double continuity = 0.0;    // ||d_t rho + div j||, L2
  double gauss_E_s = 0.0;     // same residuals in Hdot^s
  double gauss_B_s = 0.0;
  double background = 0.0;   // mean charge density removed by neutralization
};

namespace detail {
inline double residual_norm(const ScalarField& f, double s) {
  ScalarField g = f;
  if (s < 0.0) g[Grid::zero_mode].setZero();
  return hs_norm(g, s);
}
}  // namespace detail

/// Gauss-law and charge-continuity residuals of a state. The continuity
/// residual uses d_t rho = -xi_dot . grad rho with the model's velocity and
/// the model's neutralized current.
inline ConstraintReport constraint_report(const SystemState& u, ModelKind model, const ProfileOnGrid& pg, double s,
                                          double t = 0.0) {
  ConstraintReport r;
  r.t = t;
  const Grid& g = u.grid();
  ScalarField rho = charge_density(pg, u.particle.xi);
  r.background = background_density(pg);
  rho[Grid::zero_mode].setZero();
  ScalarField gE = divergence(u.em.E);
  gE -= rho;
  const ScalarField gB = divergence(u.em.B);
  r.gauss_E = hs_norm(gE, 0.0);
  r.gauss_B = hs_norm(gB, 0.0);
  r.gauss_E_s = detail::residual_norm(gE, s);
  r.gauss_B_s = detail::residual_norm(gB, s);

  const Vec3 vel = particle_velocity(model, u.particle);
  const SpectralField3 j = current_for_model(model, pg, u.particle, true);
  ScalarField cont = divergence(j);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const Vec3& k = g.k(i);
    const double kv = k.dot(vel);
    cont[i](0) += Complex(0.0, -kv) * rho[i](0);
  }
  r.continuity = hs_norm(cont, 0.0);
  return r;
}

}  // namespace mnsim
