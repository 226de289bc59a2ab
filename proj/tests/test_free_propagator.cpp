#include <catch_amalgamated.hpp>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "support/oracles.hpp"

using namespace mnsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EMState random_state(const Grid& g, std::mt19937_64& rng, int nmax = 6) {
  return EMState(oracle::random_modes(g, rng, nmax), oracle::random_modes(g, rng, nmax));
}

double rel_dist(const EMState& a, const EMState& b) {
  return std::sqrt(hs_norm_sq(a - b, 0.0) / hs_norm_sq(b, 0.0));
}

}  // namespace

TEST_CASE("curl symbol", "[symbol]") {
  CHECK(curl_symbol(Vec3::Zero()).norm() == 0.0);
  const Vec3c r = curl_symbol(Vec3(1, 0, 0)) * Vec3c(0, 1, 0);
  CHECK(r == Vec3c(0, 0, Complex(0, 1)));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 10; ++i) {
    const Vec3 k(nd(rng), nd(rng), nd(rng));
    const Mat3c C = curl_symbol(k);
    CHECK((C - C.adjoint()).norm() <= 1e-15 * C.norm());
  }
}

TEST_CASE("propagator symbol is unitary and equals the generator exponential", "[symbol][oracle]") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  CHECK((propagator_symbol(Vec3::Zero(), 3.0) - Mat6c::Identity()).norm() == 0.0);
  for (int i = 0; i < 20; ++i) {
    const Vec3 k(nd(rng), nd(rng), nd(rng));
    const double t = 5.0 * nd(rng);
    const Mat6c U = propagator_symbol(k, t);
    CHECK((U.adjoint() * U - Mat6c::Identity()).norm() <= 1e-13);
    // Free Maxwell generator: d/dt (E, B) = (i k x B, -i k x E).
    Mat6c A = Mat6c::Zero();
    A.block<3, 3>(0, 3) = curl_symbol(k);
    A.block<3, 3>(3, 0) = -curl_symbol(k);
    const Mat6c expo = (t * A).exp();
    CHECK((U - expo).norm() <= 1e-11);
  }
}

TEST_CASE("apply_U basics", "[propagator]") {
  std::mt19937_64 rng(6);
  const Grid g(16.0, 16);
  const EMState f = random_state(g, rng);

  SECTION("t = 0 is the identity") {
    const EMState u = apply_U(f, 0.0);
    CHECK(hs_norm(u - f, 0.0) == 0.0);
  }
  SECTION("group law and inverse") {
    const EMState a = apply_U(apply_U(f, 0.37), 1.91);
    const EMState b = apply_U(f, 0.37 + 1.91);
    CHECK(rel_dist(a, b) <= 1e-12);
    const EMState back = apply_U(apply_U(f, 2.3), -2.3);
    CHECK(rel_dist(back, f) <= 1e-12);
  }
  SECTION("isometry in every tested norm") {
    for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0})
      for (double t : {0.1, 1.0, 10.0}) {
        const EMState u = apply_U(f, t);
        CHECK_THAT(hs_norm(u, s), WithinRel(hs_norm(f, s), 1e-12));
      }
  }
  SECTION("longitudinal data and the zero mode are invariant") {
    ScalarField phi(g);
    const SpectralField3 r = oracle::random_modes(g, rng, 4);
    for (std::size_t i = 0; i < g.size(); ++i) phi[i](0) = r[i](0);
    EMState lon(gradient(phi), SpectralField3(g));
    lon.E[Grid::zero_mode] = Vec3c(1, 2, 3);
    lon.B[Grid::zero_mode] = Vec3c(-1, 0, 4);
    for (double t : {0.3, 7.0}) {
      const EMState u = apply_U(lon, t);
      CHECK(hs_norm(u - lon, 0.0) <= 1e-13 * hs_norm(lon, 0.0));
    }
  }
  SECTION("table and on-the-fly rotation give identical bits") {
    EMState a = f, b = f;
    propagate_in_place(a, 0.731);
    propagate_in_place(b, PropagatorTable(g, 0.731));
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(a.E[i] == b.E[i]);
      CHECK(a.B[i] == b.B[i]);
    }
  }
}

TEST_CASE("plane wave matches the analytic solution", "[propagator][oracle]") {
  const Grid g(16.0, 32);
  const double L = g.length();
  const double k = 2.0 * std::numbers::pi / L;
  const EMState w = plane_wave(g, Eigen::Vector3i(1, 0, 0), Vec3(0, 1, 0), 1.0);
  for (double t : {0.25, 1.0, 3.7}) {
    const EMState u = apply_U(w, t);
    for (const Vec3& x : {Vec3(0.2, -3.0, 1.0), Vec3(-7.5, 2.0, 0.0), Vec3(4.4, 4.4, -6.1)}) {
      const double ph = std::cos(k * x.x() - k * t);
      const Vec3 E = eval_at_point(u.E, x), B = eval_at_point(u.B, x);
      CHECK((E - Vec3(0, ph, 0)).norm() <= 1e-12);
      CHECK((B - Vec3(0, 0, ph)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("free Maxwell residual is second order", "[propagator]") {
  std::mt19937_64 rng(8);
  const Grid g(16.0, 16);
  const EMState f = random_state(g, rng, 3);
  const double t = 0.7;
  auto residual = [&](double dt) {
    const EMState up = apply_U(f, t + dt), dn = apply_U(f, t - dt), mid = apply_U(f, t);
    SpectralField3 rE = up.E - dn.E;
    rE *= 1.0 / (2.0 * dt);
    rE -= curl(mid.B);
    SpectralField3 rB = up.B - dn.B;
    rB *= 1.0 / (2.0 * dt);
    rB += curl(mid.E);
    return std::sqrt(hs_norm_sq(rE, 0.0) + hs_norm_sq(rB, 0.0));
  };
  const double r1 = residual(0.02), r2 = residual(0.01);
  CHECK_THAT(r1 / r2, WithinAbs(4.0, 0.1));
}

TEST_CASE("commutator with omega^s", "[propagator]") {
  std::mt19937_64 rng(10);
  const Grid g(16.0, 16);
  const EMState f = random_state(g, rng);
  CHECK(commutator_check(f, 1.0, 0.0) <= 1e-15);
  CHECK(commutator_check(f, 1.0, 1.0) <= 1e-12);
  CHECK(commutator_check(f, -0.5, 3.0) <= 1e-12);
}

TEST_CASE("particle drift", "[drift]") {
  const auto [x0, v0] = apply_W(Vec3(1, 2, 3), Vec3(4, 5, 6), 0.0);
  CHECK(x0 == Vec3(1, 2, 3));
  CHECK(v0 == Vec3(4, 5, 6));
  const auto [x, v] = apply_W(Vec3::Zero(), Vec3(1, 0, 0), 2.0);
  CHECK(x == Vec3(2, 0, 0));
  CHECK(v == Vec3(1, 0, 0));
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 10; ++i) {
    const Vec3 xi(nd(rng), nd(rng), nd(rng)), vv(nd(rng), nd(rng), nd(rng));
    const double s = nd(rng), t = nd(rng);
    const auto [xa, va] = apply_W(xi, vv, t);
    const auto [xb, vb] = apply_W(xa, va, s);
    const auto [xc, vc] = apply_W(xi, vv, s + t);
    CHECK((xb - xc).norm() <= 1e-14 * (1.0 + xc.norm()));
    CHECK(vb == vc);
  }
}
