#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mnsim/free_propagator.hpp"

namespace mnsim {

struct RandomFieldSpec {
  /// Target L2 norm of the field over the box.
  double l2_norm = 1.0;
  /// Spectral envelope exp(-|k|^2 / (2 k0^2)).
  double k0 = 2.0;
  bool zero_mean = true;
  bool divergence_free = false;
};

/// Smooth random real field with Gaussian-distributed coefficients under a
/// Gaussian envelope, scaled to the requested L2 norm.
inline SpectralField3 random_field(const Grid& g, std::mt19937_64& rng, const RandomFieldSpec& spec = {}) {
  std::normal_distribution<double> nd(0.0, 1.0);
  SpectralField3 f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const double kn = g.knorm(i);
    const double env = std::exp(-0.25 * kn * kn / (spec.k0 * spec.k0));
    for (int c = 0; c < 3; ++c) f[i](c) = env * Complex(nd(rng), nd(rng));
  }
  if (spec.zero_mean) f[Grid::zero_mode].setZero();
  f.symmetrize();
  if (spec.divergence_free) f = helmholtz_project(f).div_free;
  const double n = hs_norm(f, 0.0);
  if (n > 0.0) f *= spec.l2_norm / n;
  return f;
}

inline EMState random_em_state(const Grid& g, std::mt19937_64& rng, const RandomFieldSpec& spec = {}) {
  SpectralField3 E = random_field(g, rng, spec);
  SpectralField3 B = random_field(g, rng, spec);
  return EMState(std::move(E), std::move(B));
}

/// Transverse plane wave E = amp pol cos(k.x), B = k_hat x E, travelling
/// along k = 2 pi n / L. pol is projected onto the plane normal to k.
inline EMState plane_wave(const Grid& g, const Eigen::Vector3i& n, const Vec3& pol, double amp) {
  EMState em(g);
  const std::size_t idx = em.E.index_of(n.x(), n.y(), n.z());
  const Vec3 k = g.k(idx);
  const double kn = k.norm();
  if (kn == 0.0) throw DomainError("plane_wave: wavevector must be nonzero");
  const Vec3 khat = k / kn;
  Vec3 p = pol - khat * khat.dot(pol);
  if (p.norm() == 0.0) throw DomainError("plane_wave: polarization parallel to k");
  p.normalize();
  const Vec3 e = 0.5 * amp * p;
  const Vec3 b = 0.5 * amp * khat.cross(p);
  const std::size_t mir = em.E.index_of(-n.x(), -n.y(), -n.z());
  em.E[idx] = e.cast<Complex>();
  em.B[idx] = b.cast<Complex>();
  em.E[mir] = e.cast<Complex>();
  em.B[mir] = b.cast<Complex>();
  return em;
}

}  // namespace mnsim
