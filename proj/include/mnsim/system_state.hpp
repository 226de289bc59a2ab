#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mnsim/dynamics.hpp"

namespace mnsim {

/// u(t) = (E, B, xi, v) with the model-specific extras in the particle part.
struct SystemState {
  EMState em;
  ParticleState particle;

  explicit SystemState(const Grid& g) : em(g) {}
  SystemState(EMState e, ParticleState p) : em(std::move(e)), particle(p) {}

  const Grid& grid() const noexcept { return em.grid(); }
};

/// |xi|^2 + |v|^2 (+ |Omega|^2 for the rotating model).
inline double particle_norm_sq(ModelKind model, const ParticleState& p) {
  double n = p.xi.squaredNorm() + p.v.squaredNorm();
  if (model == ModelKind::rotating) n += p.omega.squaredNorm();
  return n;
}

inline double particle_distance_sq(ModelKind model, const ParticleState& a, const ParticleState& b) {
  double n = (a.xi - b.xi).squaredNorm() + (a.v - b.v).squaredNorm();
  if (model == ModelKind::rotating) n += (a.omega - b.omega).squaredNorm();
  return n;
}

/// Squared X_s norm ||E||^2_{Hdot^s} + ||B||^2_{Hdot^s} + particle part.
inline double xs_norm_sq(const SystemState& u, double s, ModelKind model) {
  return hs_norm_sq(u.em, s) + particle_norm_sq(model, u.particle);
}
inline double xs_norm(const SystemState& u, double s, ModelKind model) { return std::sqrt(xs_norm_sq(u, s, model)); }

/// Squared Y_r norm with nonhomogeneous field norms.
inline double yr_norm_sq(const SystemState& u, double r, ModelKind model) {
  return sobolev_norm_sq(u.em, r) + particle_norm_sq(model, u.particle);
}

/// X_s distance between two states on one grid.
inline double xs_distance(const SystemState& a, const SystemState& b, double s, ModelKind model) {
  EMState d = a.em - b.em;
  return std::sqrt(hs_norm_sq(d, s) + particle_distance_sq(model, a.particle, b.particle));
}

/// Bookkeeping for one accepted local step.
struct StepRecord {
  double t_start = 0.0;
  double t_end = 0.0;
  double rho = 0.0;
  double T = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double contraction_estimate = 0.0;
};

/// Time-ordered states. A local solve stores its collocation nodes; a global
/// solve stores the step endpoints and the per-step metadata.
struct Trajectory {
  ModelKind model = ModelKind::newton;
  double s = 0.0;
  std::vector<double> times;
  std::vector<SystemState> states;
  std::vector<StepRecord> steps;

  std::size_t size() const noexcept { return times.size(); }
  const SystemState& back() const { return states.back(); }
  void push(double t, SystemState u) {
    times.push_back(t);
    states.push_back(std::move(u));
  }
};

/// sup over nodes of the X_s distance.
inline double trajectory_distance(const Trajectory& a, const Trajectory& b, double s) {
  if (a.size() != b.size()) throw DomainError("trajectory_distance: node counts differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, xs_distance(a.states[i], b.states[i], s, a.model));
  return d;
}

inline double trajectory_norm(const Trajectory& a, double s) {
  double d = 0.0;
  for (const auto& u : a.states) d = std::max(d, xs_norm(u, s, a.model));
  return d;
}

}  // namespace mnsim
