#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mnsim/errors.hpp"

namespace mnsim {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Vec3c = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using Mat3c = Eigen::Matrix3cd;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Plain cross product of complex vectors. Eigen's cross() conjugates the
/// result for complex scalars.
template <class A, class B>
Vec3c cross_c(const A& a, const B& b) {
  const Vec3c x = a.template cast<Complex>(), y = b.template cast<Complex>();
  return Vec3c(x.y() * y.z() - x.z() * y.y(), x.z() * y.x() - x.x() * y.z(), x.x() * y.y() - x.y() * y.x());
}

/// Periodic box [-L/2, L/2)^3 carrying N Fourier modes per axis.
///
/// Modes are stored in FFT order: the axis index i in [0, N) stands for the
/// integer wavenumber n = i for i < N/2 and n = i - N otherwise, so the
/// wavevector of mode (ix, iy, iz) is 2*pi*(nx, ny, nz)/L. The flat index is
/// (ix*N + iy)*N + iz.
///
/// The Nyquist planes (any axis index equal to N/2) have no conjugate partner
/// on the grid. They are inactive: every field keeps them at exactly zero.
class Grid {
public:
  Grid(double L, int N) : L_(L), N_(N) {
    if (!(L > 0.0) || !std::isfinite(L))
      throw DomainError("grid: box length L must be positive and finite");
    if (N < 4 || N % 2 != 0)
      throw DomainError("grid: N must be an even integer >= 4 (got " + std::to_string(N) + ")");
    build();
  }

  double length() const noexcept { return L_; }
  int modes_per_axis() const noexcept { return N_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(N_) * N_ * N_; }
  double volume() const noexcept { return L_ * L_ * L_; }

  /// Smallest nonzero wavenumber 2*pi/L.
  double k_min() const noexcept { return two_pi / L_; }

  /// Integer wavenumber of axis index i.
  int wavenumber(int i) const noexcept { return i < N_ / 2 ? i : i - N_; }
  /// Wavenumber (1/length) of axis index i.
  double k1d(int i) const noexcept { return table_->k1d[static_cast<std::size_t>(i)]; }

  std::size_t flat(int ix, int iy, int iz) const noexcept {
    return (static_cast<std::size_t>(ix) * N_ + static_cast<std::size_t>(iy)) * N_ + static_cast<std::size_t>(iz);
  }

  const Vec3& k(std::size_t idx) const noexcept { return table_->k[idx]; }
  double knorm(std::size_t idx) const noexcept { return table_->kn[idx]; }
  bool active(std::size_t idx) const noexcept { return table_->active[idx] != 0; }
  /// Index of the mode with wavevector -k (meaningful for active modes).
  std::size_t mirror(std::size_t idx) const noexcept { return table_->mirror[idx]; }

  static constexpr std::size_t zero_mode = 0;

  /// Threshold below which |k| is treated as the zero mode.
  double k_epsilon() const noexcept { return 1e-14 * k_min(); }

  bool operator==(const Grid& o) const noexcept { return L_ == o.L_ && N_ == o.N_; }
  bool operator!=(const Grid& o) const noexcept { return !(*this == o); }

private:
  struct Table {
    std::vector<double> k1d;
    std::vector<Vec3> k;
    std::vector<double> kn;
    std::vector<std::uint32_t> mirror;
    std::vector<char> active;
  };

  void build() {
    auto t = std::make_shared<Table>();
    const int N = N_;
    t->k1d.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) t->k1d[static_cast<std::size_t>(i)] = two_pi * wavenumber(i) / L_;
    // Exact antisymmetry k(-n) = -k(n), so mirrored modes see bitwise-negated wavevectors.
    for (int i = 1; i < N / 2; ++i) t->k1d[static_cast<std::size_t>(N - i)] = -t->k1d[static_cast<std::size_t>(i)];
    const std::size_t total = size();
    t->k.resize(total);
    t->kn.resize(total);
    t->mirror.resize(total);
    t->active.resize(total);
    for (int ix = 0; ix < N; ++ix)
      for (int iy = 0; iy < N; ++iy)
        for (int iz = 0; iz < N; ++iz) {
          const std::size_t idx = flat(ix, iy, iz);
          Vec3 kv(t->k1d[ix], t->k1d[iy], t->k1d[iz]);
          t->k[idx] = kv;
          t->kn[idx] = kv.norm();
          t->active[idx] = (ix != N / 2 && iy != N / 2 && iz != N / 2) ? 1 : 0;
          t->mirror[idx] = static_cast<std::uint32_t>(flat((N - ix) % N, (N - iy) % N, (N - iz) % N));
        }
    table_ = std::move(t);
  }

  double L_;
  int N_;
  std::shared_ptr<const Table> table_;
};

inline Grid make_grid(double L, int N) { return Grid(L, N); }

/// Separable plane-wave factors exp(sign * i k.x) for one point x.
///
/// The factor of mode (ix, iy, iz) is the product of the three axis factors.
/// Negative wavenumbers are the exact conjugates of the positive ones.
class PhaseTable {
public:
  PhaseTable(const Grid& g, const Vec3& x, int sign = +1) : N_(g.modes_per_axis()) {
    for (int a = 0; a < 3; ++a) {
      auto& ax = axis_[static_cast<std::size_t>(a)];
      ax.resize(static_cast<std::size_t>(N_));
      for (int i = 0; i <= N_ / 2; ++i) {
        const double arg = sign * g.k1d(i) * x[a];
        ax[static_cast<std::size_t>(i)] = Complex(std::cos(arg), std::sin(arg));
      }
      for (int i = 1; i < N_ / 2; ++i)
        ax[static_cast<std::size_t>(N_ - i)] = std::conj(ax[static_cast<std::size_t>(i)]);
    }
  }

  const std::vector<Complex>& axis(int a) const noexcept { return axis_[static_cast<std::size_t>(a)]; }
  Complex operator()(int ix, int iy, int iz) const noexcept {
    return axis_[0][static_cast<std::size_t>(ix)] * axis_[1][static_cast<std::size_t>(iy)] *
           axis_[2][static_cast<std::size_t>(iz)];
  }

private:
  int N_;
  std::array<std::vector<Complex>, 3> axis_;
};

/// Calls fn(idx, phase) for every active mode in flat-index order, where phase
/// is the table's factor for that mode.
template <class Fn>
void for_each_active_mode(const Grid& g, const PhaseTable& ph, Fn&& fn) {
  const int N = g.modes_per_axis();
  const auto& px = ph.axis(0);
  const auto& py = ph.axis(1);
  const auto& pz = ph.axis(2);
  for (int ix = 0; ix < N; ++ix) {
    if (ix == N / 2) continue;
    for (int iy = 0; iy < N; ++iy) {
      if (iy == N / 2) continue;
      const Complex pxy = px[static_cast<std::size_t>(ix)] * py[static_cast<std::size_t>(iy)];
      for (int iz = 0; iz < N; ++iz) {
        if (iz == N / 2) continue;
        fn(g.flat(ix, iy, iz), pxy * pz[static_cast<std::size_t>(iz)]);
      }
    }
  }
}

}  // namespace mnsim
