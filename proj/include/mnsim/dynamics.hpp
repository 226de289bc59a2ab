#pragma once

#include <cmath>
#include <string>

#include "mnsim/charge_model.hpp"

namespace mnsim {

enum class ModelKind { newton, abraham, rotating };

inline std::string model_name(ModelKind m) {
  switch (m) {
    case ModelKind::newton: return "newton";
    case ModelKind::abraham: return "abraham";
    case ModelKind::rotating: return "rotating";
  }
  return "unknown";
}

inline ModelKind parse_model(const std::string& s) {
  if (s == "newton") return ModelKind::newton;
  if (s == "abraham") return ModelKind::abraham;
  if (s == "rotating") return ModelKind::rotating;
  throw ConfigError("unknown model '" + s + "' (expected newton, abraham or rotating)");
}

/// Particle half of the state.
///
/// v holds the velocity for the newton and rotating models and the momentum
/// p for the abraham model. omega and I are used by the rotating model only.
struct ParticleState {
  Vec3 xi = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  double m = 1.0;
  double I = 1.0;
};

struct ParticleDerivative {
  Vec3 dxi = Vec3::Zero();
  Vec3 dv = Vec3::Zero();
  Vec3 domega = Vec3::Zero();
};

/// p / sqrt(1 + |p|^2).
inline Vec3 velocity_from_momentum(const Vec3& p) { return p / std::sqrt(1.0 + p.squaredNorm()); }

inline Vec3 particle_velocity(ModelKind model, const ParticleState& ps) {
  return model == ModelKind::abraham ? velocity_from_momentum(ps.v) : ps.v;
}

inline void validate_particle(ModelKind model, const ParticleState& ps) {
  if (!(ps.m > 0.0) || !std::isfinite(ps.m)) throw ConfigError("particle: mass m must be positive");
  if (model == ModelKind::rotating && (!(ps.I > 0.0) || !std::isfinite(ps.I)))
    throw ConfigError("particle: moment of inertia I must be positive");
  if (!ps.xi.allFinite() || !ps.v.allFinite() || !ps.omega.allFinite())
    throw ConfigError("particle: state contains non-finite entries");
}

inline void require_model_support(ModelKind model, const ProfileOnGrid& pg) {
  if (model == ModelKind::rotating && !pg.has_moments())
    throw ConfigError("model rotating needs moment kernels; the profile provides none");
}

/// Smeared E and B at the particle plus, for the rotating model, the moment
/// integrals. Everything particle_rhs and torque need from the fields.
struct FieldSample {
  MomentSmearing E;
  MomentSmearing B;
};

inline FieldSample sample_fields(ModelKind model, const ProfileOnGrid& pg, const EMState& em, const Vec3& xi) {
  FieldSample s;
  if (model == ModelKind::rotating) {
    s.E = moment_smearing(pg, em.E, xi);
    s.B = moment_smearing(pg, em.B, xi);
  } else {
    s.E.a = smeared_field(pg, em.E, xi);
    s.B.a = smeared_field(pg, em.B, xi);
  }
  return s;
}

namespace detail {
inline Vec3 antisym_contract(const Mat3& P) {
  return {P(1, 2) - P(2, 1), P(2, 0) - P(0, 2), P(0, 1) - P(1, 0)};
}
}  // namespace detail

/// Torque integral of the rotating model divided by I:
/// (1/I) integral y x [E + (v + Omega x y) x B] phi(xi - x) dx, y = x - xi.
inline Vec3 torque_from_sample(const FieldSample& f, const ParticleState& ps) {
  const Mat3& PB = f.B.P;
  const Vec3 tau = detail::antisym_contract(f.E.P) + ps.v * PB.trace() - PB.transpose() * ps.v + ps.omega.cross(f.B.w);
  return tau / ps.I;
}

inline ParticleDerivative rhs_from_sample(ModelKind model, double e, const FieldSample& f, const ParticleState& ps) {
  ParticleDerivative d;
  switch (model) {
    case ModelKind::newton:
      d.dxi = ps.v;
      d.dv = (e / ps.m) * (f.E.a + ps.v.cross(f.B.a));
      break;
    case ModelKind::abraham: {
      const Vec3 vel = velocity_from_momentum(ps.v);
      d.dxi = vel;
      d.dv = e * (f.E.a + vel.cross(f.B.a));
      break;
    }
    case ModelKind::rotating: {
      const Mat3& PB = f.B.P;
      d.dxi = ps.v;
      d.dv = (e / ps.m) * (f.E.a + ps.v.cross(f.B.a) + PB * ps.omega - ps.omega * PB.trace());
      d.domega = torque_from_sample(f, ps);
      break;
    }
  }
  return d;
}

/// Time derivative of the particle variables in the given fields.
inline ParticleDerivative particle_rhs(ModelKind model, const ProfileOnGrid& pg, const EMState& em,
                                       const ParticleState& ps) {
  require_model_support(model, pg);
  return rhs_from_sample(model, pg.charge(), sample_fields(model, pg, em, ps.xi), ps);
}

/// Angular acceleration of the rotating model.
inline Vec3 torque(const ProfileOnGrid& pg, const EMState& em, const ParticleState& ps) {
  require_model_support(ModelKind::rotating, pg);
  return torque_from_sample(sample_fields(ModelKind::rotating, pg, em, ps.xi), ps);
}

/// Source current of the model. For the rotating model
/// j_hat = (e / L^3) exp(-i k.xi) [v phi_hat + Omega x psi_hat], psi_hat the
/// transform of x phi.
inline SpectralField3 current_for_model(ModelKind model, const ProfileOnGrid& pg, const ParticleState& ps,
                                        bool neutralize = false) {
  if (model != ModelKind::rotating || ps.omega.squaredNorm() == 0.0)
    return current_density(pg, ps.xi, particle_velocity(model, ps), neutralize);
  require_model_support(model, pg);
  const Grid& g = pg.grid();
  SpectralField3 j(g);
  const double scale = pg.charge() / g.volume();
  if (scale == 0.0) return j;
  const Vec3c vc = ps.v.cast<Complex>();
  const Vec3c oc = ps.omega.cast<Complex>();
  PhaseTable ph(g, ps.xi, -1);
  for_each_active_mode(g, ph, [&](std::size_t i, Complex p) {
    j[i] = (scale * p) * (pg.phihat(i) * vc + cross_c(oc, pg.first_moment(i)));
  });
  if (neutralize) j[Grid::zero_mode].setZero();
  j.symmetrize();
  return j;
}

}  // namespace mnsim
