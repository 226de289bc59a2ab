#pragma once

#include <cmath>

#include "mnsim/system_state.hpp"

namespace mnsim {

/// Exponential a-priori bound on the squared state norm:
/// bound(t) = (1 + |t - t0|^2) exp(rate |t - t0|) ||u0||^2.
///
/// Homogeneous kind: rate = |e| (1 + 6 ||phi||^2_{Hdot^s} + 3 ||phi||^2_{Hdot^-s}),
/// norm X_s. Nonhomogeneous kind: rate = |e| (1 + 9 ||phi||^2_{H^r}), norm Y_r.
struct GrowthCertificate {
  bool homogeneous = true;
  double index = 0.0;
  double t0 = 0.0;
  double u0_norm_sq = 0.0;
  double rate = 0.0;

  double bound(double t) const {
    const double dt = std::abs(t - t0);
    return (1.0 + dt * dt) * std::exp(rate * dt) * u0_norm_sq;
  }
  /// The squared norm the certificate speaks about.
  double state_norm_sq(const SystemState& u, ModelKind model) const {
    return homogeneous ? xs_norm_sq(u, index, model) : yr_norm_sq(u, index, model);
  }
};

inline double growth_rate_homogeneous(double e, double phi_plus_s, double phi_minus_s) {
  return std::abs(e) * (1.0 + 6.0 * phi_plus_s * phi_plus_s + 3.0 * phi_minus_s * phi_minus_s);
}

inline double growth_rate_nonhomogeneous(double e, double phi_h_r) { return std::abs(e) * (1.0 + 9.0 * phi_h_r * phi_h_r); }

inline GrowthCertificate make_certificate(const NormTable& norms, double e, const SystemState& u0, double t0,
                                          ModelKind model) {
  GrowthCertificate c;
  c.homogeneous = true;
  c.index = norms.s;
  c.t0 = t0;
  c.u0_norm_sq = xs_norm_sq(u0, norms.s, model);
  c.rate = growth_rate_homogeneous(e, norms.plus_s, norms.minus_s);
  return c;
}

inline GrowthCertificate make_certificate_hr(const NormTable& norms, double e, const SystemState& u0, double t0,
                                             ModelKind model) {
  GrowthCertificate c;
  c.homogeneous = false;
  c.index = norms.r;
  c.t0 = t0;
  c.u0_norm_sq = yr_norm_sq(u0, norms.r, model);
  c.rate = growth_rate_nonhomogeneous(e, norms.h_r);
  return c;
}

inline double growth_bound(const GrowthCertificate& c, double t, double t0) {
  GrowthCertificate shifted = c;
  shifted.t0 = t0;
  return shifted.bound(t);
}

}  // namespace mnsim
