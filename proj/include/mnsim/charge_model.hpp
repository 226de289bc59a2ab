#pragma once

#include <cmath>

#include "mnsim/charge_profile.hpp"
#include "mnsim/free_propagator.hpp"

namespace mnsim {

/// Charge density rho(x) = e phi(xi - x). Coefficients e phi_hat(k) exp(-i k.xi) / L^3.
inline ScalarField charge_density(const ProfileOnGrid& pg, const Vec3& xi) {
  const Grid& g = pg.grid();
  ScalarField rho(g);
  const double scale = pg.charge() / g.volume();
  if (scale == 0.0) return rho;
  PhaseTable ph(g, xi, -1);
  for_each_active_mode(g, ph, [&](std::size_t i, Complex p) { rho[i](0) = scale * pg.phihat(i) * p; });
  rho.symmetrize();
  return rho;
}

/// Current j(x) = e v phi(xi - x).
///
/// With neutralize set the k = 0 mode is dropped, which is the uniform
/// background current that keeps the field means constant on the torus.
inline SpectralField3 current_density(const ProfileOnGrid& pg, const Vec3& xi, const Vec3& v,
                                      bool neutralize = false) {
  const Grid& g = pg.grid();
  SpectralField3 j(g);
  const double scale = pg.charge() / g.volume();
  if (scale == 0.0 || v.squaredNorm() == 0.0) return j;
  const Vec3c vc = v.cast<Complex>();
  PhaseTable ph(g, xi, -1);
  for_each_active_mode(g, ph, [&](std::size_t i, Complex p) { j[i] = (scale * pg.phihat(i) * p) * vc; });
  if (neutralize) j[Grid::zero_mode].setZero();
  j.symmetrize();
  return j;
}

/// (phi * F)(xi) = sum_k phi_hat(k) c(k) exp(i k.xi).
template <int C>
Eigen::Matrix<double, C, 1> smeared_field(const ProfileOnGrid& pg, const SpectralField<C>& F, const Vec3& xi) {
  if (!F.is_real()) throw DomainError("smeared_field: field is not flagged real");
  const Grid& g = F.grid();
  if (g != pg.grid()) throw DomainError("smeared_field: profile and field on different grids");
  PhaseTable ph(g, xi, +1);
  Eigen::Matrix<Complex, C, 1> acc = Eigen::Matrix<Complex, C, 1>::Zero();
  for_each_active_mode(g, ph, [&](std::size_t i, Complex p) { acc += (pg.phihat(i) * p) * F[i]; });
  return acc.real();
}

/// e [(phi*E)(xi) + v x (phi*B)(xi)].
inline Vec3 lorentz_force(const ProfileOnGrid& pg, const EMState& em, const Vec3& xi, const Vec3& v) {
  const Vec3 a = smeared_field(pg, em.E, xi);
  const Vec3 b = smeared_field(pg, em.B, xi);
  return pg.charge() * (a + v.cross(b));
}

/// Field integrals seen by an extended rotating charge at xi, with y = x - xi:
///
///   a_F      = integral F(x) phi(xi - x) dx
///   P_F(i,j) = integral y_i F_j(x) phi(xi - x) dx
///   w_F,c    = sum_d integral y_c y_d F_d(x) phi(xi - x) dx
///
/// all obtained from the transforms of x_i phi and x_i x_j phi.
struct MomentSmearing {
  Vec3 a = Vec3::Zero();
  Mat3 P = Mat3::Zero();
  Vec3 w = Vec3::Zero();
};

inline MomentSmearing moment_smearing(const ProfileOnGrid& pg, const SpectralField3& F, const Vec3& xi) {
  if (!pg.has_moments()) throw DomainError("moment smearing: profile has no moment kernels");
  if (!F.is_real()) throw DomainError("moment smearing: field is not flagged real");
  const Grid& g = F.grid();
  if (g != pg.grid()) throw DomainError("moment smearing: profile and field on different grids");
  PhaseTable ph(g, xi, +1);
  Vec3c a = Vec3c::Zero();
  Mat3c P = Mat3c::Zero();
  Vec3c w = Vec3c::Zero();
  for_each_active_mode(g, ph, [&](std::size_t i, Complex p) {
    const Vec3c c = p * F[i];
    a += pg.phihat(i) * c;
    // -(x_i phi * F_j)(xi)
    P -= pg.first_moment(i) * c.transpose();
    w += pg.second_moment(i) * c;
  });
  return {a.real(), P.real(), w.real()};
}

}  // namespace mnsim
