#include <catch_amalgamated.hpp>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "support/oracles.hpp"

using namespace mnsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const Grid coarse(16.0, 16);

SystemState coupled_state(std::mt19937_64& rng, double field, const Vec3& v) {
  SpectralField3 E = oracle::random_modes(coarse, rng, 2), B = oracle::random_modes(coarse, rng, 2);
  E *= field / hs_norm(E, 0.0);
  B *= field / hs_norm(B, 0.0);
  ParticleState p;
  p.xi = Vec3(0.5, -0.5, 1.0);
  p.v = v;
  p.omega = Vec3(0.2, -0.1, 0.3);
  return SystemState(EMState(std::move(E), std::move(B)), p);
}

double dist(const SystemState& a, const SystemState& b, ModelKind m = ModelKind::newton) {
  return xs_distance(a, b, 0.0, m);
}

}  // namespace

TEST_CASE("oracle configuration", "[oracle]") {
  const ProfileOnGrid pg(ChargeProfile::gaussian(1.0, 1.0), coarse);
  CHECK_THROWS_AS(ReferenceOracle(ModelKind::newton, pg, OracleConfig{0.0, 4}), DomainError);
  CHECK_THROWS_AS(ReferenceOracle(ModelKind::newton, pg, OracleConfig{0.1, 3}), DomainError);
  const ReferenceOracle o(ModelKind::newton, pg, OracleConfig{0.1, 2, 1});
  const Trajectory tr = o.solve(SystemState(coarse), 0.0, 0.35);
  REQUIRE(tr.size() == 5);
  CHECK(tr.times.back() == 0.35);
  CHECK_THAT(tr.times[1], WithinRel(0.0875, 1e-14));
  CHECK(o.solve(SystemState(coarse), 1.0, 1.0).size() == 1);
}

TEST_CASE("velocity flow in constant fields", "[oracle]") {
  // v' = c - beta x v via the exponential of the augmented 4x4 generator.
  std::mt19937_64 rng(81);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 10; ++rep) {
    const Vec3 v(nd(rng), nd(rng), nd(rng)), c(nd(rng), nd(rng), nd(rng));
    const Vec3 beta = (rep == 0 ? 1e-7 : 1.0) * Vec3(nd(rng), nd(rng), nd(rng));
    const double h = 0.5 * nd(rng);
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    A.block<3, 3>(0, 0) << 0, beta.z(), -beta.y(), -beta.z(), 0, beta.x(), beta.y(), -beta.x(), 0;
    A.block<3, 1>(0, 3) = c;
    const Eigen::Vector4d x = (h * A).exp() * Eigen::Vector4d(v.x(), v.y(), v.z(), 1.0);
    const Vec3 got = oracle_detail::linear_velocity_flow(v, c, beta, h);
    CHECK((got - x.head<3>()).norm() <= 1e-13 * (1.0 + x.norm()));
  }
}

TEST_CASE("zero charge gives the exact free flow", "[oracle]") {
  std::mt19937_64 rng(83);
  const ProfileOnGrid pg(ChargeProfile::gaussian(1.0, 0.0), coarse);
  const SystemState u0 = coupled_state(rng, 1.0, Vec3(0.3, 0.2, -0.1));
  SystemState exact(apply_U(u0.em, 1.3), u0.particle);
  exact.particle.xi += 1.3 * u0.particle.v;
  for (double dt : {0.5, 0.01})
    for (int order : {2, 4}) {
      const Trajectory tr = reference_solve(ModelKind::newton, pg, u0, 0.0, 1.3, OracleConfig{dt, order});
      CHECK(dist(tr.back(), exact) <= 1e-12);
    }
}

TEST_CASE("Strang steps are time-reversible", "[oracle]") {
  std::mt19937_64 rng(85);
  const ProfileOnGrid pg(ChargeProfile::gaussian(1.0, 1.0), coarse);
  for (ModelKind m : {ModelKind::newton, ModelKind::abraham}) {
    const ReferenceOracle o(m, pg, OracleConfig{0.05, 2});
    const SystemState u0 = coupled_state(rng, 0.5, Vec3(0.4, -0.2, 0.1));
    SystemState u = u0;
    o.step(u, 0.05);
    CHECK(dist(u, u0, m) > 1e-3);
    o.step(u, -0.05);
    CHECK(dist(u, u0, m) <= 1e-13);
  }
  // The rotating model's particle kick is RK4, reversible to O(h^5) per step.
  const ReferenceOracle o(ModelKind::rotating, pg, OracleConfig{0.05, 2});
  auto roundtrip = [&](double h) {
    std::mt19937_64 r(87);
    const SystemState u0 = coupled_state(r, 0.5, Vec3(0.4, -0.2, 0.1));
    SystemState u = u0;
    o.step(u, h);
    o.step(u, -h);
    return dist(u, u0, ModelKind::rotating);
  };
  CHECK(roundtrip(0.1) <= 1e-6);
}

TEST_CASE("self-convergence order", "[oracle][convergence]") {
  // Strong coupling and coarse steps keep the error well above rounding.
  std::mt19937_64 rng(89);
  const ProfileOnGrid pg(ChargeProfile::gaussian(1.0, 4.0), coarse);
  const SystemState u0 = coupled_state(rng, 2.0, Vec3(0.5, -0.3, 0.2));
  for (int order : {2, 4}) {
    auto run = [&](double dt) { return reference_solve(ModelKind::newton, pg, u0, 0.0, 0.8, OracleConfig{dt, order}).back(); };
    const SystemState a = run(0.2), b = run(0.1), c = run(0.05);
    const double ratio = dist(a, b) / dist(b, c);
    INFO("order " << order << " ratio " << ratio);
    CHECK_THAT(ratio, WithinRel(std::pow(2.0, order), 0.2));
  }
}

TEST_CASE("oracle and Picard solver agree", "[oracle][picard]") {
  std::mt19937_64 rng(91);
  const ChargeProfile prof = ChargeProfile::gaussian(1.0, 1.0);
  const ProfileOnGrid pg(prof, coarse);
  const SystemState u0 = coupled_state(rng, 0.3, Vec3(0.2, 0.1, -0.1));
  const double M = build_norm_table(prof, 0.0).M;
  const double t_end = 0.5;

  SECTION("newton within 1e-6") {
    const Trajectory p = PicardSolver(ModelKind::newton, pg, M, SolverSettings{}).global_solve(u0, 0.0, t_end);
    const Trajectory o = reference_solve(ModelKind::newton, pg, u0, 0.0, t_end, OracleConfig{1e-2, 4});
    CHECK(dist(p.back(), o.back()) <= 1e-6);
  }
  SECTION("distances shrink as both tolerances tighten") {
    std::vector<double> d;
    for (auto [tol, dt] : {std::pair{1e-4, 0.1}, std::pair{1e-7, 0.05}, std::pair{1e-10, 0.025}}) {
      SolverSettings set;
      set.picard_tol = tol;
      const Trajectory p = PicardSolver(ModelKind::newton, pg, M, set).global_solve(u0, 0.0, t_end);
      const Trajectory o = reference_solve(ModelKind::newton, pg, u0, 0.0, t_end, OracleConfig{dt, 4});
      d.push_back(dist(p.back(), o.back()));
    }
    CHECK(d[1] < d[0]);
    CHECK(d[2] < d[1]);
  }
  SECTION("abraham and rotating") {
    for (ModelKind m : {ModelKind::abraham, ModelKind::rotating}) {
      const double Mm = build_norm_table(prof, 0.0, 0.0, m == ModelKind::rotating).M;
      const Trajectory p = PicardSolver(m, pg, Mm, SolverSettings{}).global_solve(u0, 0.0, 0.25);
      const Trajectory o = reference_solve(m, pg, u0, 0.0, 0.25, OracleConfig{1e-2, 4});
      CHECK(dist(p.back(), o.back(), m) <= 1e-6);
    }
  }
}
