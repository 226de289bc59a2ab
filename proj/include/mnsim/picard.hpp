#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mnsim/chebyshev.hpp"
#include "mnsim/growth.hpp"

namespace mnsim {

struct StepSizeParts {
  double T = 0.0;
  double T_a = 0.0;  // a = 2 root
  double T_c = 0.0;  // contraction root at radius 2 rho
};

/// Certified half-width T(rho) = min{T_a(rho), T_c(2 rho) / 2} where
///   T_c(2 rho) solves T (T + 1) |e| M (16 rho^2 + 5) = 1 and
///   T_a(rho) solves (T + 1)(sqrt 2 + T |e| M a (4 a^2 rho^2 + 5)) - a = 0, a = 2.
/// Infinite for e = 0.
inline StepSizeParts step_size_parts(double rho, double M, double e) {
  if (!(M > 0.0) || !std::isfinite(M)) throw DomainError("step_size: M must be positive");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw DomainError("step_size: rho must be finite and >= 0");
  StepSizeParts p;
  if (e == 0.0) {
    p.T = p.T_a = p.T_c = std::numeric_limits<double>::infinity();
    return p;
  }
  const double eM = std::abs(e) * M;
  // Positive root of T^2 + T - 1/K, written without cancellation.
  auto root = [](double K) { return 2.0 / (K * (1.0 + std::sqrt(1.0 + 4.0 / K))); };
  // Contraction on the ball of radius 2 rho: 4 (2 rho)^2 + 5 = 16 rho^2 + 5.
  p.T_c = root(eM * (16.0 * rho * rho + 5.0));
  // K2 T^2 + (sqrt2 + K2) T + sqrt2 - 2 = 0 with K2 = 2 |e| M (16 rho^2 + 5).
  const double K2 = 2.0 * eM * (16.0 * rho * rho + 5.0);
  const double b = std::sqrt(2.0) + K2;
  const double c = std::sqrt(2.0) - 2.0;
  p.T_a = -2.0 * c / (b + std::sqrt(b * b - 4.0 * K2 * c));
  p.T = std::min(p.T_a, 0.5 * p.T_c);
  return p;
}

inline double step_size(double rho, double M, double e) { return step_size_parts(rho, M, e).T; }

/// Contraction constant T (T + 1) M |e| (4 rho^2 + 5) of the Duhamel map on
/// the ball of radius rho.
inline double contraction_bound(double T, double rho, double M, double e) {
  return T * (T + 1.0) * M * std::abs(e) * (4.0 * rho * rho + 5.0);
}

struct SolverSettings {
  double s = 0.0;
  double eta = 0.9;
  double picard_tol = 1e-10;
  int max_iter = 50;
  int q = 8;
  double max_step = 1.0;
  double min_step = 1e-9;
  /// Steps end exactly on origin + n * cadence when cadence > 0.
  double breakpoint_origin = 0.0;
  double breakpoint_cadence = 0.0;
  /// Norm above monitor_safety * certificate is an integrity failure.
  bool monitor = true;
  double monitor_safety = 1.5;
  /// When false, global_solve keeps only the first and latest states (times
  /// and step records are always kept). For long runs streamed to an observer.
  bool keep_states = true;
};

struct StepPlan {
  double rho = 0.0;
  double M = 0.0;
  double e = 0.0;
  double T = 0.0;
  double eta = 0.9;
  double picard_tol = 1e-10;
  int max_iter = 50;
};

enum class Span { forward, backward, symmetric };

struct LocalResult {
  Trajectory traj;
  StepRecord record;
};

/// Receives every accepted collocation node of a global solve in time order.
using NodeObserver = std::function<void(double t, const SystemState& u, const StepRecord& step)>;

/// Duhamel fixed-point solver for one model, profile and Sobolev index.
///
/// Within a local interval the fields are carried in the interaction
/// picture: with G_j = U(t0 - tau_j)(-j(tau_j), 0),
///   F(tau_i) = U(tau_i - t0) [F0 + sum_j Q1(i, j) G_j],
///   v(tau_i) = v0 + sum_j Q1(i, j) f(tau_j),
///   xi(tau_i) = xi0 + (tau_i - t0) v0 + sum_j Q2(i, j) f(tau_j).
/// The source current drops its k = 0 mode (neutralizing background).
class PicardSolver {
public:
  PicardSolver(ModelKind model, ProfileOnGrid pg, double M, SolverSettings settings)
      : model_(model), pg_(std::move(pg)), M_(M), set_(settings) {
    require_model_support(model_, pg_);
    SobolevIndex::homogeneous(set_.s);
    if (!(M_ > 0.0)) throw DomainError("solver: M must be positive");
    if (!(set_.eta > 0.0 && set_.eta <= 1.0)) throw DomainError("solver: eta must lie in (0, 1]");
    if (!(set_.picard_tol > 0.0)) throw DomainError("solver: picard_tol must be positive");
    if (set_.max_iter < 1) throw DomainError("solver: max_iter must be >= 1");
    if (set_.q < 2 || set_.q % 2 != 0) throw DomainError("solver: q must be an even integer >= 2");
    if (!(set_.max_step > 0.0)) throw DomainError("solver: max_step must be positive");
  }

  ModelKind model() const noexcept { return model_; }
  const ProfileOnGrid& profile() const noexcept { return pg_; }
  const SolverSettings& settings() const noexcept { return set_; }
  double M() const noexcept { return M_; }
  double charge() const noexcept { return pg_.charge(); }

  StepPlan plan(const SystemState& u0) const {
    StepPlan p;
    p.rho = xs_norm(u0, set_.s, model_);
    p.M = M_;
    p.e = charge();
    p.T = step_size(p.rho, M_, p.e);
    p.eta = set_.eta;
    p.picard_tol = set_.picard_tol;
    p.max_iter = set_.max_iter;
    return p;
  }

  /// Collocation nodes of [a, b] (a < b) for the given anchor.
  std::vector<double> nodes(double a, double b) const {
    const ChebyshevRule rule(set_.q, 0);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::vector<double> t(rule.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = c + h * rule.node(i);
    t.front() = a;
    t.back() = b;
    return t;
  }

  /// The free flow (U, W) of u0 sampled at the given times.
  Trajectory free_flow(const SystemState& u0, double t0, const std::vector<double>& times) const {
    Trajectory tr;
    tr.model = model_;
    tr.s = set_.s;
    for (double t : times) tr.push(t, free_state(u0, t - t0));
    return tr;
  }

  /// One application of the Duhamel map A[t0, u0] to a trajectory on
  /// collocation nodes; t0 must be one of the nodes.
  Trajectory apply_A(const Trajectory& u, const SystemState& u0, double t0) const {
    const Frame f = frame_of(u.times, t0);
    return apply(f, u, u0);
  }

  /// Fixed point on [t0 - eta T, t0 + eta T] (symmetric) or the one-sided
  /// interval of length eta T.
  LocalResult local_solve(const SystemState& u0, double t0, const StepPlan& plan, Span span = Span::symmetric) const {
    const double H = plan.eta * plan.T;
    if (!std::isfinite(H)) throw DomainError("local_solve: infinite step; bound the interval explicitly");
    switch (span) {
      case Span::forward: return solve_between(u0, t0, t0 + H, plan);
      case Span::backward: return solve_between(u0, t0, t0 - H, plan);
      case Span::symmetric: break;
    }
    std::vector<double> times = nodes(t0 - H, t0 + H);
    times[times.size() / 2] = t0;
    return iterate(frame_of(times, t0), u0, plan);
  }

  /// Fixed point on the interval between t0 and t1 anchored at t0.
  LocalResult solve_between(const SystemState& u0, double t0, double t1, const StepPlan& plan) const {
    if (t1 == t0) throw DomainError("local_solve: empty interval");
    const std::vector<double> times = t1 > t0 ? nodes(t0, t1) : nodes(t1, t0);
    return iterate(frame_of(times, t0), u0, plan);
  }

  /// ||A u1 - A u2|| / ||u1 - u2|| in X_s(I); 0 for identical inputs.
  double contraction_factor(const Trajectory& u1, const Trajectory& u2, const SystemState& u0, double t0) const {
    const double den = trajectory_distance(u1, u2, set_.s);
    if (den == 0.0) return 0.0;
    const Frame f = frame_of(u1.times, t0);
    return trajectory_distance(apply(f, u1, u0), apply(f, u2, u0), set_.s) / den;
  }

  /// Chains local solves from t0 to t_end, restarting from the latest state
  /// with a fresh step plan each time. Returns the step endpoints.
  Trajectory global_solve(const SystemState& u0, double t0, double t_end, const NodeObserver& observer = {},
                          const NormTable* norms = nullptr) const {
    Trajectory out;
    out.model = model_;
    out.s = set_.s;
    out.push(t0, u0);
    const double dir = t_end >= t0 ? 1.0 : -1.0;
    GrowthCertificate cert;
    const bool monitor = set_.monitor && norms != nullptr;
    if (monitor) cert = make_certificate(*norms, charge(), u0, t0, model_);
    double t = t0;
    SystemState u = u0;
    bool first = true;
    while (dir * (t_end - t) > 0.0) {
      const StepPlan p = plan(u);
      double target = t_end;
      double H = p.eta * p.T;
      if (set_.max_step < H) H = set_.max_step;
      if (dir * (t_end - t) > H) target = t + dir * H;
      const double bp = next_breakpoint(t, dir);
      if (dir * (target - bp) > 0.0) target = bp;
      LocalResult res;
      for (;;) {
        if (std::abs(target - t) < set_.min_step && target != t_end && target != bp)
          throw IntegrityError("global_solve: step underflow at t = " + std::to_string(t));
        try {
          res = solve_between(u, t, target, p);
          break;
        } catch (const ConvergenceError&) {
          target = t + 0.5 * (target - t);
          if (std::abs(target - t) < set_.min_step)
            throw IntegrityError("global_solve: step underflow at t = " + std::to_string(t));
        }
      }
      const Trajectory& tr = res.traj;
      const std::size_t n = tr.size();
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = dir > 0 ? k : n - 1 - k;
        if (i == anchor_index(n, dir) && !first) continue;
        if (monitor) {
          const double nrm = cert.state_norm_sq(tr.states[i], model_);
          if (nrm > set_.monitor_safety * cert.bound(tr.times[i]))
            throw IntegrityError("global_solve: state norm exceeds the growth certificate at t = " +
                                 std::to_string(tr.times[i]));
        }
        if (observer) observer(tr.times[i], tr.states[i], res.record);
      }
      first = false;
      const std::size_t last = dir > 0 ? n - 1 : 0;
      t = target;
      u = tr.states[last];
      out.steps.push_back(res.record);
      if (!set_.keep_states && out.states.size() > 1) out.states.pop_back();
      out.push(t, u);
    }
    return out;
  }

private:
  struct Frame {
    std::vector<double> tau;
    double t0 = 0.0;
    double h = 0.0;
    int anchor = 0;
    Eigen::MatrixXd Q1;
    Eigen::MatrixXd Q2;
    std::vector<PropagatorTable> forward;   // U(tau_i - t0)
    std::vector<PropagatorTable> backward;  // U(t0 - tau_i)
  };

  static std::size_t anchor_index(std::size_t n, double dir) { return dir > 0 ? 0 : n - 1; }

  double next_breakpoint(double t, double dir) const {
    const double c = set_.breakpoint_cadence;
    if (!(c > 0.0)) return dir > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    const double o = set_.breakpoint_origin;
    const double x = (t - o) / c;
    const double eps = 1e-9;
    const double n = dir > 0 ? std::floor(x + eps) + 1.0 : std::ceil(x - eps) - 1.0;
    return o + n * c;
  }

  Frame frame_of(const std::vector<double>& times, double t0) const {
    const std::size_t n = times.size();
    if (n < 3 || n % 2 == 0) throw DomainError("apply_A: need an odd number >= 3 of collocation nodes");
    const int q = static_cast<int>(n) - 1;
    int anchor = -1;
    for (std::size_t i = 0; i < n; ++i)
      if (times[i] == t0) anchor = static_cast<int>(i);
    if (anchor < 0) throw DomainError("apply_A: t0 is not a node of the trajectory");
    Frame f;
    f.tau = times;
    f.t0 = t0;
    f.anchor = anchor;
    f.h = 0.5 * (times.back() - times.front());
    if (!(f.h > 0.0)) throw DomainError("apply_A: nodes must increase");
    const ChebyshevRule rule(q, anchor);
    const double c = 0.5 * (times.back() + times.front());
    const double tol = 1e-12 * std::max({1.0, std::abs(c), f.h});
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(times[i] - (c + f.h * rule.node(i))) > tol)
        throw DomainError("apply_A: node " + std::to_string(i) + " is not a collocation node of the interval");
    f.Q1 = f.h * rule.Q1();
    f.Q2 = f.h * f.h * rule.Q2();
    for (double t : times) {
      f.forward.emplace_back(pg_.grid(), t - t0);
      f.backward.emplace_back(pg_.grid(), t0 - t);
    }
    return f;
  }

  SystemState free_state(const SystemState& u0, double dt) const {
    SystemState u = u0;
    propagate_in_place(u.em, dt);
    u.particle.xi = u0.particle.xi + dt * particle_velocity(model_, u0.particle);
    return u;
  }

  Trajectory apply(const Frame& f, const Trajectory& u, const SystemState& u0) const {
    const std::size_t n = f.tau.size();
    if (u.size() != n) throw DomainError("apply_A: trajectory and frame sizes differ");
    const Grid& g = u0.grid();
    const double e = charge();
    std::vector<EMState> G;
    G.reserve(n);
    std::vector<ParticleDerivative> d(n);
    std::vector<Vec3> vel(n);
    for (std::size_t j = 0; j < n; ++j) {
      const ParticleState& pj = u.states[j].particle;
      EMState src(g);
      if (e != 0.0) {
        src.E = current_for_model(model_, pg_, pj, true);
        src.E *= -1.0;
        propagate_in_place(src, f.backward[j]);
      }
      G.push_back(std::move(src));
      d[j] = e != 0.0 ? rhs_from_sample(model_, e, sample_fields(model_, pg_, u.states[j].em, pj.xi), pj)
                      : ParticleDerivative{};
      vel[j] = particle_velocity(model_, pj);
    }
    const Vec3 vel0 = particle_velocity(model_, u0.particle);
    Trajectory out;
    out.model = model_;
    out.s = set_.s;
    for (std::size_t i = 0; i < n; ++i) {
      EMState F = u0.em;
      for (std::size_t j = 0; j < n; ++j) {
        const double w = f.Q1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (w == 0.0 || e == 0.0) continue;
        F.E.axpy(w, G[j].E);
        F.B.axpy(w, G[j].B);
      }
      const double dt = f.tau[i] - f.t0;
      propagate_in_place(F, f.forward[i]);
      ParticleState p = u0.particle;
      Vec3 dxi = dt * vel0;
      for (std::size_t j = 0; j < n; ++j) {
        const double w1 = f.Q1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        p.v += w1 * d[j].dv;
        p.omega += w1 * d[j].domega;
        if (model_ == ModelKind::abraham)
          dxi += w1 * (vel[j] - vel0);
        else
          dxi += f.Q2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * d[j].dv;
      }
      p.xi = u0.particle.xi + dxi;
      out.push(f.tau[i], SystemState(std::move(F), p));
    }
    return out;
  }

  LocalResult iterate(const Frame& f, const SystemState& u0, const StepPlan& plan) const {
    const double rho = plan.rho;
    const double ball = 2.0 * rho * (1.0 + 1e-12) + 1e-300;
    Trajectory u = free_flow(u0, f.t0, f.tau);
    double prev = 0.0, est = 0.0;
    for (int k = 1; k <= plan.max_iter; ++k) {
      Trajectory next = apply(f, u, u0);
      const double dk = trajectory_distance(next, u, set_.s);
      for (std::size_t i = 0; i < next.size(); ++i) {
        const double nrm = xs_norm(next.states[i], set_.s, model_);
        if (nrm > ball)
          throw ConvergenceError("local_solve: iterate left the ball of radius 2 rho at t = " +
                                     std::to_string(next.times[i]),
                                 prev > 0.0 ? dk / prev : 0.0);
      }
      est = prev > 0.0 ? dk / prev : 0.0;
      u = std::move(next);
      if (dk <= plan.picard_tol * rho) {
        LocalResult r;
        r.traj = std::move(u);
        r.record.t_start = f.t0;
        r.record.t_end = f.tau[static_cast<std::size_t>(f.anchor)] == f.tau.front() ? f.tau.back() : f.tau.front();
        r.record.rho = rho;
        r.record.T = plan.T;
        r.record.iterations = k;
        r.record.residual = dk;
        r.record.contraction_estimate = est;
        return r;
      }
      prev = dk;
    }
    throw ConvergenceError("local_solve: no convergence in " + std::to_string(plan.max_iter) +
                               " iterations (contraction estimate " + std::to_string(est) + ")",
                           est);
  }

  ModelKind model_;
  ProfileOnGrid pg_;
  double M_;
  SolverSettings set_;
};

}  // namespace mnsim
