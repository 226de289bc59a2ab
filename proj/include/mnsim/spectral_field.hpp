#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mnsim/grid.hpp"

namespace mnsim {

/// Field with C complex components per Fourier mode.
///
/// Normalization: the field is f(x) = sum_k c(k) exp(i k.x), so the squared L2
/// norm over the box is L^3 * sum |c(k)|^2. This is the only convention used
/// anywhere in the library.
///
/// When the reality flag is set the coefficients satisfy c(-k) = conj(c(k))
/// and represent a real field. Nyquist modes are always zero.
template <int C>
class SpectralField {
public:
  using Coeff = Eigen::Matrix<Complex, C, 1>;

  explicit SpectralField(Grid grid, bool real = true)
      : grid_(std::move(grid)), coeff_(grid_.size(), Coeff::Zero()), real_(real) {}

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return coeff_.size(); }

  bool is_real() const noexcept { return real_; }
  void set_real(bool r) noexcept { real_ = r; }

  Coeff& operator[](std::size_t i) noexcept { return coeff_[i]; }
  const Coeff& operator[](std::size_t i) const noexcept { return coeff_[i]; }
  std::vector<Coeff>& data() noexcept { return coeff_; }
  const std::vector<Coeff>& data() const noexcept { return coeff_; }

  /// Mode amplitude by signed integer wavenumbers.
  Coeff& at(int nx, int ny, int nz) { return coeff_[index_of(nx, ny, nz)]; }
  const Coeff& at(int nx, int ny, int nz) const { return coeff_[index_of(nx, ny, nz)]; }

  std::size_t index_of(int nx, int ny, int nz) const {
    const int N = grid_.modes_per_axis();
    auto wrap = [N](int n) {
      if (n <= -N / 2 || n >= N / 2) throw DomainError("mode index out of the active range");
      return n < 0 ? n + N : n;
    };
    return grid_.flat(wrap(nx), wrap(ny), wrap(nz));
  }

  /// Restores conjugate symmetry by averaging each mode with its mirror,
  /// zeroes the Nyquist planes and sets the reality flag.
  void symmetrize() {
    for (std::size_t i = 0; i < coeff_.size(); ++i) {
      if (!grid_.active(i)) {
        coeff_[i].setZero();
        continue;
      }
      const std::size_t m = grid_.mirror(i);
      if (m < i) continue;
      if (m == i) {
        coeff_[i] = coeff_[i].real().template cast<Complex>();
        continue;
      }
      const Coeff avg = 0.5 * (coeff_[i] + coeff_[m].conjugate());
      coeff_[i] = avg;
      coeff_[m] = avg.conjugate();
    }
    real_ = true;
  }

  /// Largest |c(k) - conj(c(-k))| relative to the largest coefficient.
  double symmetry_defect() const {
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < coeff_.size(); ++i) {
      scale = std::max(scale, coeff_[i].norm());
      if (!grid_.active(i)) {
        worst = std::max(worst, coeff_[i].norm());
        continue;
      }
      worst = std::max(worst, (coeff_[i] - coeff_[grid_.mirror(i)].conjugate()).norm());
    }
    return scale > 0.0 ? worst / scale : worst;
  }

  SpectralField& operator+=(const SpectralField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] += o.coeff_[i];
    real_ = real_ && o.real_;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] -= o.coeff_[i];
    real_ = real_ && o.real_;
    return *this;
  }
  SpectralField& operator*=(double a) {
    for (auto& c : coeff_) c *= a;
    return *this;
  }
  /// this += a * o
  SpectralField& axpy(double a, const SpectralField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] += a * o.coeff_[i];
    real_ = real_ && o.real_;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  void check_same_grid(const SpectralField& o) const {
    if (grid_ != o.grid_) throw DomainError("fields live on different grids");
  }

private:
  Grid grid_;
  std::vector<Coeff> coeff_;
  bool real_;
};

using SpectralField3 = SpectralField<3>;
using ScalarField = SpectralField<1>;

/// Which Sobolev family a norm index belongs to.
struct SobolevIndex {
  enum class Kind { homogeneous, nonhomogeneous };

  Kind kind;
  double value;

  /// Homogeneous index s; the space is Hilbert only for s < 3/2.
  static SobolevIndex homogeneous(double s) {
    if (!(s < 1.5)) throw DomainError("homogeneous Sobolev index s must be < 3/2 (got " + std::to_string(s) + ")");
    return {Kind::homogeneous, s};
  }
  /// Nonhomogeneous index r >= 0.
  static SobolevIndex nonhomogeneous(double r) {
    if (!(r >= 0.0)) throw DomainError("nonhomogeneous Sobolev index r must be >= 0 (got " + std::to_string(r) + ")");
    return {Kind::nonhomogeneous, r};
  }
};

/// |k|^(2s) with the conventions 0^0 = 1 and 0^(2s) = 0 for s > 0.
/// Callers guarantee the zero mode is empty when s < 0.
inline double homogeneous_weight(double kn, double s) {
  if (s == 0.0) return 1.0;
  if (kn == 0.0) return s > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::pow(kn, 2.0 * s);
}

template <int C>
bool has_zero_mean(const SpectralField<C>& f) {
  return f[Grid::zero_mode].squaredNorm() == 0.0;
}

namespace detail {
template <int C>
void require_homogeneous_domain(const SpectralField<C>& f, double s) {
  if (!(s < 1.5)) throw DomainError("hs_norm: s must be < 3/2 (got " + std::to_string(s) + ")");
  if (s < 0.0 && !has_zero_mean(f))
    throw DomainError("hs_norm: a field with nonzero mean has no finite norm for s < 0");
}
}  // namespace detail

/// Squared homogeneous norm L^3 * sum_k |k|^(2s) |c(k)|^2.
template <int C>
double hs_norm_sq(const SpectralField<C>& f, double s) {
  detail::require_homogeneous_domain(f, s);
  const Grid& g = f.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!g.active(i)) continue;
    const double c2 = f[i].squaredNorm();
    if (c2 == 0.0) continue;
    acc += homogeneous_weight(g.knorm(i), s) * c2;
  }
  return g.volume() * acc;
}

template <int C>
double hs_norm(const SpectralField<C>& f, double s) {
  return std::sqrt(hs_norm_sq(f, s));
}

/// Squared nonhomogeneous norm L^3 * sum_k (1 + |k|^2)^r |c(k)|^2.
template <int C>
double sobolev_norm_sq(const SpectralField<C>& f, double r) {
  if (!(r >= 0.0)) throw DomainError("sobolev_norm: r must be >= 0 (got " + std::to_string(r) + ")");
  const Grid& g = f.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!g.active(i)) continue;
    const double c2 = f[i].squaredNorm();
    if (c2 == 0.0) continue;
    const double kn = g.knorm(i);
    acc += (r == 0.0 ? 1.0 : std::pow(1.0 + kn * kn, r)) * c2;
  }
  return g.volume() * acc;
}

template <int C>
double sobolev_norm(const SpectralField<C>& f, double r) {
  return std::sqrt(sobolev_norm_sq(f, r));
}

template <int C>
double norm(const SpectralField<C>& f, SobolevIndex idx) {
  return idx.kind == SobolevIndex::Kind::homogeneous ? hs_norm(f, idx.value) : sobolev_norm(f, idx.value);
}

/// L2 inner product <a, b> = L^3 * sum conj(a(k)).b(k).
template <int C>
Complex inner(const SpectralField<C>& a, const SpectralField<C>& b) {
  a.check_same_grid(b);
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i].dot(b[i]);
  return a.grid().volume() * acc;
}

/// Multiplies every active mode by the real symbol w(|k|) and re-symmetrizes.
template <int C, class Symbol>
SpectralField<C> apply_radial_multiplier(const SpectralField<C>& f, Symbol&& w) {
  SpectralField<C> out(f.grid(), f.is_real());
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (g.active(i)) out[i] = w(g.knorm(i)) * f[i];
  if (f.is_real()) out.symmetrize();
  return out;
}

/// omega^s = |nabla|^s. The zero mode is kept for s = 0, dropped for s > 0 and
/// must be empty for s < 0.
template <int C>
SpectralField<C> omega_power(const SpectralField<C>& f, double s) {
  if (s < 0.0 && !has_zero_mean(f)) throw DomainError("omega_power: nonzero mean with s < 0");
  return apply_radial_multiplier(f, [s](double kn) {
    if (s == 0.0) return 1.0;
    if (kn == 0.0) return 0.0;
    return std::pow(kn, s);
  });
}

/// Divergence i k.c(k).
inline ScalarField divergence(const SpectralField3& f) {
  ScalarField out(f.grid(), f.is_real());
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!g.active(i)) continue;
    const Vec3& k = g.k(i);
    const Complex kc = k.x() * f[i].x() + k.y() * f[i].y() + k.z() * f[i].z();
    out[i](0) = Complex(0.0, 1.0) * kc;
  }
  return out;
}

/// Gradient i k c(k).
inline SpectralField3 gradient(const ScalarField& f) {
  SpectralField3 out(f.grid(), f.is_real());
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!g.active(i)) continue;
    out[i] = Complex(0.0, 1.0) * f[i](0) * g.k(i).cast<Complex>();
  }
  return out;
}

/// Curl i k x c(k).
inline SpectralField3 curl(const SpectralField3& f) {
  SpectralField3 out(f.grid(), f.is_real());
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!g.active(i)) continue;
    const Vec3c kc = g.k(i).cast<Complex>();
    out[i] = Complex(0.0, 1.0) * cross_c(kc, f[i]);
  }
  return out;
}

struct HelmholtzParts {
  SpectralField3 div_free;
  SpectralField3 gradient;
};

/// Splits f into its divergence-free part and its gradient part, mode by
/// mode with the projector k k^T / |k|^2. The zero mode goes to div_free, and
/// the two parts add back to f exactly.
inline HelmholtzParts helmholtz_project(const SpectralField3& f) {
  const Grid& g = f.grid();
  HelmholtzParts out{SpectralField3(g, f.is_real()), SpectralField3(g, f.is_real())};
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!g.active(i)) continue;
    const double kn = g.knorm(i);
    if (kn < g.k_epsilon()) {
      out.div_free[i] = f[i];
      continue;
    }
    const Vec3& k = g.k(i);
    const Complex kc = k.x() * f[i].x() + k.y() * f[i].y() + k.z() * f[i].z();
    const Vec3c grad = (kc / (kn * kn)) * k.cast<Complex>();
    out.gradient[i] = grad;
    out.div_free[i] = f[i] - grad;
  }
  return out;
}

/// sum_k c(k) exp(i k.x) without taking the real part.
template <int C>
Eigen::Matrix<Complex, C, 1> eval_at_point_complex(const SpectralField<C>& f, const Vec3& x) {
  const Grid& g = f.grid();
  PhaseTable ph(g, x, +1);
  Eigen::Matrix<Complex, C, 1> acc = Eigen::Matrix<Complex, C, 1>::Zero();
  for_each_active_mode(g, ph, [&](std::size_t i, Complex p) { acc += p * f[i]; });
  return acc;
}

/// Point value of a real field by exact trigonometric interpolation.
inline Vec3 eval_at_point(const SpectralField3& f, const Vec3& x) {
  if (!f.is_real()) throw DomainError("eval_at_point: field is not flagged real");
  return eval_at_point_complex(f, x).real();
}

inline double eval_at_point(const ScalarField& f, const Vec3& x) {
  if (!f.is_real()) throw DomainError("eval_at_point: field is not flagged real");
  return eval_at_point_complex(f, x)(0).real();
}

}  // namespace mnsim
