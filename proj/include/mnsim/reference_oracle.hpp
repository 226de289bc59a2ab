#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mnsim/system_state.hpp"

namespace mnsim {

struct OracleConfig {
  double dt = 1e-3;
  int order = 4;  // 2: Strang, 4: Yoshida triple of Strang steps
  /// Store every n-th step in the returned trajectory (0: endpoints only).
  int record_every = 0;
};

namespace oracle_detail {

/// sin(x)/x, (1 - cos x)/x^2 and (1 - sin(x)/x)/x^2 with series near 0.
inline double sinc(double x) { return std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }
inline double cosc(double x) { return std::abs(x) < 1e-4 ? 0.5 - x * x / 24.0 : (1.0 - std::cos(x)) / (x * x); }
inline double sincc(double x) {
  return std::abs(x) < 1e-3 ? 1.0 / 6.0 - x * x / 120.0 : (1.0 - std::sin(x) / x) / (x * x);
}

/// Exact flow of v' = c - beta x v over time h.
inline Vec3 linear_velocity_flow(const Vec3& v, const Vec3& c, const Vec3& beta, double h) {
  const double th = beta.norm() * h;
  const double cs = std::cos(th);
  const double bb = h * h;
  // Rotation by angle -|beta| h about beta.
  const Vec3 rot = cs * v + bb * cosc(th) * beta * beta.dot(v) - h * sinc(th) * beta.cross(v);
  // integral_0^h R(-beta s) c ds.
  const Vec3 drive = h * (sinc(th) * c + bb * sincc(th) * beta * beta.dot(c) - h * cosc(th) * beta.cross(c));
  return rot + drive;
}

}  // namespace oracle_detail

/// Splitting integrator used to cross-check the Picard solver. It shares only
/// the free propagator and the charge-model primitives with the solver.
///
/// One Strang step of size h is A(h/2) K(h) A(h/2) with A the exact free flow
/// (U for the fields, drift for the particle) and K the source kick
/// E -= (h/2) j, particle kick over h in the frozen fields, E -= (h/2) j.
class ReferenceOracle {
public:
  ReferenceOracle(ModelKind model, ProfileOnGrid pg, OracleConfig cfg)
      : model_(model), pg_(std::move(pg)), cfg_(cfg) {
    if (!(cfg_.dt > 0.0)) throw DomainError("oracle: dt must be positive");
    if (cfg_.order != 2 && cfg_.order != 4) throw DomainError("oracle: order must be 2 or 4");
    require_model_support(model_, pg_);
  }

  /// Integrates from t0 to t_end with steps of at most dt (the last step is
  /// shortened so the run ends on t_end). Backward runs use negative steps.
  Trajectory solve(const SystemState& u0, double t0, double t_end) const {
    Trajectory tr;
    tr.model = model_;
    tr.push(t0, u0);
    const double span = t_end - t0;
    const long n = static_cast<long>(std::ceil(std::abs(span) / cfg_.dt - 1e-9));
    if (n == 0) return tr;
    const double h = span / static_cast<double>(n);
    SystemState u = u0;
    Tables tables;
    for (long k = 1; k <= n; ++k) {
      step(u, h, &tables);
      const bool last = k == n;
      if (last || (cfg_.record_every > 0 && k % cfg_.record_every == 0))
        tr.push(last ? t_end : t0 + static_cast<double>(k) * h, u);
    }
    return tr;
  }

  /// Drift tables keyed by duration; every step of a fixed-size run reuses
  /// the same few.
  struct Tables {
    std::vector<PropagatorTable> list;
    const PropagatorTable& get(const Grid& g, double t) {
      for (const auto& p : list)
        if (p.time() == t) return p;
      list.emplace_back(g, t);
      return list.back();
    }
  };

  void step(SystemState& u, double h, Tables* tables = nullptr) const {
    if (cfg_.order == 2) {
      strang(u, h, tables);
      return;
    }
    const double cbrt2 = std::cbrt(2.0);
    const double w1 = 1.0 / (2.0 - cbrt2);
    const double w0 = -cbrt2 / (2.0 - cbrt2);
    strang(u, w1 * h, tables);
    strang(u, w0 * h, tables);
    strang(u, w1 * h, tables);
  }

  void strang(SystemState& u, double h, Tables* tables = nullptr) const {
    drift(u, 0.5 * h, tables);
    kick(u, h);
    drift(u, 0.5 * h, tables);
  }

private:
  void drift(SystemState& u, double h, Tables* tables) const {
    if (tables)
      propagate_in_place(u.em, tables->get(u.grid(), h));
    else
      propagate_in_place(u.em, h);
    u.particle.xi += h * particle_velocity(model_, u.particle);
  }

  void field_kick(SystemState& u, double h) const {
    if (pg_.charge() == 0.0) return;
    const SpectralField3 j = current_for_model(model_, pg_, u.particle, true);
    u.em.E.axpy(-h, j);
  }

  void kick(SystemState& u, double h) const {
    field_kick(u, 0.5 * h);
    particle_kick(u, h);
    field_kick(u, 0.5 * h);
  }

  void particle_kick(SystemState& u, double h) const {
    const double e = pg_.charge();
    if (e == 0.0) return;
    ParticleState& p = u.particle;
    const FieldSample f = sample_fields(model_, pg_, u.em, p.xi);
    switch (model_) {
      case ModelKind::newton: {
        const double q = e / p.m;
        p.v = oracle_detail::linear_velocity_flow(p.v, q * f.E.a, q * f.B.a, h);
        break;
      }
      case ModelKind::abraham: {
        // Electric half kicks around an exact magnetic rotation; |p| and hence
        // the rotation rate are constant during the rotation.
        p.v += 0.5 * h * e * f.E.a;
        const Vec3 beta = e * f.B.a / std::sqrt(1.0 + p.v.squaredNorm());
        p.v = oracle_detail::linear_velocity_flow(p.v, Vec3::Zero(), beta, h);
        p.v += 0.5 * h * e * f.E.a;
        break;
      }
      case ModelKind::rotating: {
        auto rhs = [&](const ParticleState& s) { return rhs_from_sample(model_, e, f, s); };
        ParticleState s1 = p;
        const ParticleDerivative k1 = rhs(s1);
        ParticleState s2 = p;
        s2.v += 0.5 * h * k1.dv;
        s2.omega += 0.5 * h * k1.domega;
        const ParticleDerivative k2 = rhs(s2);
        ParticleState s3 = p;
        s3.v += 0.5 * h * k2.dv;
        s3.omega += 0.5 * h * k2.domega;
        const ParticleDerivative k3 = rhs(s3);
        ParticleState s4 = p;
        s4.v += h * k3.dv;
        s4.omega += h * k3.domega;
        const ParticleDerivative k4 = rhs(s4);
        p.v += h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
        p.omega += h / 6.0 * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega);
        break;
      }
    }
  }

  ModelKind model_;
  ProfileOnGrid pg_;
  OracleConfig cfg_;
};

inline Trajectory reference_solve(ModelKind model, const ProfileOnGrid& pg, const SystemState& u0, double t0,
                                  double t_end, const OracleConfig& cfg) {
  return ReferenceOracle(model, pg, cfg).solve(u0, t0, t_end);
}

}  // namespace mnsim
