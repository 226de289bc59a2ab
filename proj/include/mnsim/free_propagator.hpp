#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "mnsim/spectral_field.hpp"

namespace mnsim {

/// Electromagnetic half of the state: electric field E and magnetic field B,
/// both as ordinary 3-vectors (B_j = eps_jkl F^kl / 2).
struct EMState {
  SpectralField3 E;
  SpectralField3 B;

  explicit EMState(const Grid& g) : E(g), B(g) {}
  EMState(SpectralField3 e, SpectralField3 b) : E(std::move(e)), B(std::move(b)) {
    if (E.grid() != B.grid()) throw DomainError("EMState: E and B on different grids");
  }

  const Grid& grid() const noexcept { return E.grid(); }
  bool is_real() const noexcept { return E.is_real() && B.is_real(); }

  EMState& operator+=(const EMState& o) {
    E += o.E;
    B += o.B;
    return *this;
  }
  EMState& operator-=(const EMState& o) {
    E -= o.E;
    B -= o.B;
    return *this;
  }
  EMState& operator*=(double a) {
    E *= a;
    B *= a;
    return *this;
  }
  friend EMState operator-(EMState a, const EMState& b) { return a -= b; }
  friend EMState operator+(EMState a, const EMState& b) { return a += b; }
};

inline double hs_norm_sq(const EMState& em, double s) { return hs_norm_sq(em.E, s) + hs_norm_sq(em.B, s); }
inline double hs_norm(const EMState& em, double s) { return std::sqrt(hs_norm_sq(em, s)); }
inline double sobolev_norm_sq(const EMState& em, double r) {
  return sobolev_norm_sq(em.E, r) + sobolev_norm_sq(em.B, r);
}

/// Symbol of the curl: C(k) f = i k x f. Hermitian for real k.
inline Mat3c curl_symbol(const Vec3& k) {
  const Complex I(0.0, 1.0);
  Mat3c c;
  c << 0.0, -I * k.z(), I * k.y(),
       I * k.z(), 0.0, -I * k.x(),
       -I * k.y(), I * k.x(), 0.0;
  return c;
}

using Mat6c = Eigen::Matrix<Complex, 6, 6>;

/// cos(|k| t) and sin(|k| t)/|k| for one mode, with the sinc limit t at |k| = 0.
struct ModeRotation {
  double cos_kt = 1.0;
  double sinc_t = 0.0;

  static ModeRotation make(double kn, double t, double k_eps) {
    if (kn < k_eps) return {1.0, t};
    return {std::cos(kn * t), std::sin(kn * t) / kn};
  }
};

/// Per-mode 6x6 matrix of the free group acting on (E(k), B(k)):
///
///   [ P_par + cos(|k|t) P_perp      sin(|k|t)/|k| C(k)       ]
///   [ -sin(|k|t)/|k| C(k)           P_par + cos(|k|t) P_perp ]
///
/// with P_par = k k^T / |k|^2 and P_perp = I - P_par. Identity at k = 0.
inline Mat6c propagator_symbol(const Vec3& k, double t, double k_eps = 1e-300) {
  Mat6c u = Mat6c::Identity();
  const double kn = k.norm();
  if (kn < k_eps) return u;
  const ModeRotation rot = ModeRotation::make(kn, t, k_eps);
  const Mat3 ppar = k * k.transpose() / (kn * kn);
  const Mat3 pperp = Mat3::Identity() - ppar;
  const Mat3c diag = (ppar + rot.cos_kt * pperp).cast<Complex>();
  const Mat3c off = rot.sinc_t * curl_symbol(k);
  u.block<3, 3>(0, 0) = diag;
  u.block<3, 3>(3, 3) = diag;
  u.block<3, 3>(0, 3) = off;
  u.block<3, 3>(3, 0) = -off;
  return u;
}

namespace detail {
/// Applies the mode matrix without forming it.
inline void rotate_mode(const Vec3& k, double kn, const ModeRotation& rot, Vec3c& e, Vec3c& b) {
  const double inv_k2 = 1.0 / (kn * kn);
  const Complex ke = k.x() * e.x() + k.y() * e.y() + k.z() * e.z();
  const Complex kb = k.x() * b.x() + k.y() * b.y() + k.z() * b.z();
  // i k x f, written out so no complex product with a real factor is formed.
  auto icross = [&](const Vec3c& f) {
    const Complex cx = k.y() * f.z() - k.z() * f.y();
    const Complex cy = k.z() * f.x() - k.x() * f.z();
    const Complex cz = k.x() * f.y() - k.y() * f.x();
    return Vec3c(Complex(-cx.imag(), cx.real()), Complex(-cy.imag(), cy.real()), Complex(-cz.imag(), cz.real()));
  };
  const double c = rot.cos_kt, sn = rot.sinc_t, par = (1.0 - c) * inv_k2;
  const Vec3c curl_e = icross(e);
  const Vec3c curl_b = icross(b);
  Vec3c e_new, b_new;
  for (int a = 0; a < 3; ++a) {
    e_new[a] = c * e[a] + par * ke * k[a] + sn * curl_b[a];
    b_new[a] = c * b[a] + par * kb * k[a] - sn * curl_e[a];
  }
  e = e_new;
  b = b_new;
}

template <class RotationAt>
void propagate_modes(EMState& em, RotationAt&& rotation_at) {
  const Grid& g = em.grid();
  const bool real = em.E.is_real() && em.B.is_real();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const std::size_t m = g.mirror(i);
    if (real && m < i) continue;
    const double kn = g.knorm(i);
    if (kn < g.k_epsilon()) continue;
    rotate_mode(g.k(i), kn, rotation_at(i, kn), em.E[i], em.B[i]);
    if (real) {
      em.E[m] = em.E[i].conjugate();
      em.B[m] = em.B[i].conjugate();
    }
  }
}
}  // namespace detail

/// Per-mode cos/sinc tables for one time offset. Building a table and
/// computing the rotation on the fly produce identical bits.
class PropagatorTable {
public:
  PropagatorTable(const Grid& g, double t) : t_(t), rot_(g.size()) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g.active(i)) rot_[i] = ModeRotation::make(g.knorm(i), t, g.k_epsilon());
  }
  double time() const noexcept { return t_; }
  const ModeRotation& operator[](std::size_t i) const noexcept { return rot_[i]; }

private:
  double t_;
  std::vector<ModeRotation> rot_;
};

/// Applies the free group U(t) in place using a precomputed table. Real
/// fields are updated on one mode of each +-k pair and the mirror is set to
/// the conjugate.
inline void propagate_in_place(EMState& em, const PropagatorTable& table) {
  detail::propagate_modes(em, [&](std::size_t i, double) { return table[i]; });
}

/// Applies U(t) in place, computing the rotation per mode.
inline void propagate_in_place(EMState& em, double t) {
  const double eps = em.grid().k_epsilon();
  detail::propagate_modes(em, [&](std::size_t, double kn) { return ModeRotation::make(kn, t, eps); });
}

/// Free Maxwell evolution over time t. Longitudinal components and the zero
/// mode are left unchanged; U(t) is unitary in every homogeneous norm.
inline EMState apply_U(const EMState& em, double t) {
  EMState out = em;
  propagate_in_place(out, t);
  return out;
}

/// Free particle drift W(t): (xi, v) -> (xi + t v, v).
inline std::pair<Vec3, Vec3> apply_W(const Vec3& xi, const Vec3& v, double t) { return {xi + t * v, v}; }

/// Relative norm of omega^s U(t) f - U(t) omega^s f, with each ordering
/// computed separately.
inline double commutator_check(const EMState& em, double s, double t) {
  EMState lhs(omega_power(em.E, s), omega_power(em.B, s));
  propagate_in_place(lhs, t);
  EMState rhs = apply_U(em, t);
  rhs.E = omega_power(rhs.E, s);
  rhs.B = omega_power(rhs.B, s);
  const double scale = std::sqrt(hs_norm_sq(lhs, 0.0));
  EMState diff = lhs - rhs;
  const double d = std::sqrt(hs_norm_sq(diff, 0.0));
  return scale > 0.0 ? d / scale : d;
}

}  // namespace mnsim
