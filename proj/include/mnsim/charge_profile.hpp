#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mnsim/spectral_field.hpp"

namespace mnsim {

/// Samples of a radial Fourier transform g(kappa) = phi_hat(|k|) and its first
/// two derivatives on an increasing grid starting at kappa = 0. Beyond the last
/// sample the transform is taken as zero, with |phi_hat| <= decay_bound there.
struct RadialTable {
  std::vector<double> kappa;
  std::vector<double> g;
  std::vector<double> dg;   // optional: needed for moment kernels
  std::vector<double> d2g;  // optional: needed for moment kernels
  double decay_bound = 0.0;
};

/// Rigid charge profile phi, described through its (real, even, radial)
/// Fourier transform phi_hat(k) = integral phi(x) exp(-i k.x) dx, and the
/// coupling charge e.
///
/// The Gaussian shape has phi_hat = A exp(-sigma^2 |k|^2 / 2) with A = 1 when
/// normalized (integral phi = 1) and A = (2 pi sigma^2)^(3/2) otherwise
/// (unit peak value in real space).
class ChargeProfile {
public:
  enum class Shape { gaussian, tabulated };

  static ChargeProfile gaussian(double sigma, double charge, bool normalize = true) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("gaussian profile: sigma must be positive");
    if (!std::isfinite(charge)) throw DomainError("profile: charge must be finite");
    ChargeProfile p;
    p.shape_ = Shape::gaussian;
    p.sigma_ = sigma;
    p.charge_ = charge;
    p.normalized_ = normalize;
    p.amplitude_ = normalize ? 1.0 : std::pow(two_pi * sigma * sigma, 1.5);
    return p;
  }

  static ChargeProfile tabulated(RadialTable table, double charge) {
    const auto n = table.kappa.size();
    if (n < 2 || table.g.size() != n) throw DomainError("tabulated profile: kappa and g must have equal length >= 2");
    if (table.kappa.front() != 0.0) throw DomainError("tabulated profile: kappa must start at 0");
    for (std::size_t i = 1; i < n; ++i)
      if (!(table.kappa[i] > table.kappa[i - 1])) throw DomainError("tabulated profile: kappa must increase");
    const bool d1 = table.dg.size() == n, d2 = table.d2g.size() == n;
    if ((!table.dg.empty() && !d1) || (!table.d2g.empty() && !d2))
      throw DomainError("tabulated profile: derivative columns must match kappa");
    if (!(table.decay_bound >= 0.0)) throw DomainError("tabulated profile: decay bound must be >= 0");
    ChargeProfile p;
    p.shape_ = Shape::tabulated;
    p.charge_ = charge;
    p.amplitude_ = table.g.front();
    p.normalized_ = table.g.front() == 1.0;
    p.table_ = std::move(table);
    return p;
  }

  Shape shape() const noexcept { return shape_; }
  std::string shape_name() const { return shape_ == Shape::gaussian ? "gaussian" : "tabulated"; }
  double sigma() const noexcept { return sigma_; }
  double charge() const noexcept { return charge_; }
  bool normalized() const noexcept { return normalized_; }
  /// phi_hat(0) = integral of phi.
  double total_weight() const noexcept { return amplitude_; }
  const std::optional<RadialTable>& table() const noexcept { return table_; }

  /// Whether transforms of x_i phi and x_i x_j phi are available.
  bool has_moments() const noexcept {
    return shape_ == Shape::gaussian || (!table_->dg.empty() && !table_->d2g.empty());
  }

  /// g(kappa).
  double radial(double kappa) const {
    if (shape_ == Shape::gaussian) return amplitude_ * std::exp(-0.5 * sigma_ * sigma_ * kappa * kappa);
    return table_->dg.empty() ? interp_linear(table_->g, kappa) : interp_hermite(table_->g, table_->dg, kappa);
  }

  /// g'(kappa) / kappa, continued by g''(0) at kappa = 0.
  double radial_d1_over_kappa(double kappa) const {
    require_moments();
    if (shape_ == Shape::gaussian) return -sigma_ * sigma_ * radial(kappa);
    if (kappa == 0.0) return table_->d2g.front();
    return interp_hermite(table_->dg, table_->d2g, kappa) / kappa;
  }

  /// (g'' - g'/kappa) / kappa^2, taken as 0 at kappa = 0 (it multiplies k k^T).
  double radial_curvature(double kappa) const {
    require_moments();
    if (shape_ == Shape::gaussian) return std::pow(sigma_, 4) * radial(kappa);
    if (kappa == 0.0) return 0.0;
    const double d1 = interp_hermite(table_->dg, table_->d2g, kappa);
    const double d2 = interp_linear(table_->d2g, kappa);
    return (d2 - d1 / kappa) / (kappa * kappa);
  }

  double fourier(const Vec3& k) const { return radial(k.norm()); }

  /// Transform of x_i phi(x): i d/dk_i phi_hat = i g'(kappa) k_i / kappa.
  Vec3c first_moment(const Vec3& k) const {
    return (Complex(0.0, 1.0) * radial_d1_over_kappa(k.norm())) * k.cast<Complex>();
  }

  /// Transform of x_i x_j phi(x): -d^2/dk_i dk_j phi_hat.
  Mat3c second_moment(const Vec3& k) const {
    const double kn = k.norm();
    const Mat3 m = radial_curvature(kn) * (k * k.transpose()) + radial_d1_over_kappa(kn) * Mat3::Identity();
    return (-m).cast<Complex>();
  }

  /// Largest sampled wavenumber (infinity for closed-form shapes).
  double kappa_max() const noexcept {
    return shape_ == Shape::gaussian ? std::numeric_limits<double>::infinity() : table_->kappa.back();
  }

private:
  ChargeProfile() = default;

  void require_moments() const {
    if (!has_moments()) throw DomainError("profile: moment kernels need dg and d2g columns in the table");
  }

  std::pair<std::size_t, double> locate(double kappa) const {
    const auto& k = table_->kappa;
    if (kappa >= k.back()) return {k.size() - 1, 0.0};
    const auto it = std::upper_bound(k.begin(), k.end(), kappa);
    const std::size_t i = static_cast<std::size_t>(it - k.begin()) - 1;
    return {i, (kappa - k[i]) / (k[i + 1] - k[i])};
  }

  double interp_linear(const std::vector<double>& y, double kappa) const {
    if (kappa > table_->kappa.back()) return 0.0;
    const auto [i, u] = locate(kappa);
    if (i + 1 >= y.size()) return y.back();
    return (1.0 - u) * y[i] + u * y[i + 1];
  }

  double interp_hermite(const std::vector<double>& y, const std::vector<double>& dy, double kappa) const {
    if (kappa > table_->kappa.back()) return 0.0;
    const auto [i, u] = locate(kappa);
    if (i + 1 >= y.size()) return y.back();
    const double h = table_->kappa[i + 1] - table_->kappa[i];
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    return h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1];
  }

  Shape shape_ = Shape::gaussian;
  double sigma_ = 0.0;
  double charge_ = 0.0;
  double amplitude_ = 1.0;
  bool normalized_ = true;
  std::optional<RadialTable> table_;
};

/// Which function the norm is taken of: phi, x_i phi (worst i) or
/// x_i x_j phi (worst pair).
enum class ProfileMoment { none, first, second };

namespace detail {

/// (2 pi)^-3 * 4 pi: radial reduction of (2 pi)^-3 integral dk.
inline constexpr double radial_prefactor = 1.0 / (2.0 * std::numbers::pi * std::numbers::pi);

/// integral_0^inf kappa^p exp(-a kappa^2) dkappa.
inline double gaussian_moment(double p, double a) {
  return std::tgamma(0.5 * (p + 1.0)) / (2.0 * std::pow(a, 0.5 * (p + 1.0)));
}

/// Lowest power of kappa in |transform|^2 * kappa^2 near the origin, for a
/// profile with nonzero total weight.
inline double small_k_power(ProfileMoment m, double index) {
  switch (m) {
    case ProfileMoment::none: return 2.0 * index + 2.0;
    case ProfileMoment::first: return 2.0 * index + 4.0;
    case ProfileMoment::second: return 2.0 * index + 2.0;
  }
  return 0.0;
}

inline std::string space_label(bool homogeneous, double index) {
  std::string v = std::to_string(index);
  v.erase(v.find_last_not_of('0') + 1);
  if (!v.empty() && v.back() == '.') v.pop_back();
  return (homogeneous ? "Hdot^" : "H^") + v;
}

/// Angular average of |transform|^2 for the requested moment, as a function
/// of kappa; the worst component is taken.
inline double angular_average_sq(const ChargeProfile& p, ProfileMoment m, double kappa) {
  const double g = p.radial(kappa);
  switch (m) {
    case ProfileMoment::none: return g * g;
    case ProfileMoment::first: {
      const double a = p.radial_d1_over_kappa(kappa);
      return a * a * kappa * kappa / 3.0;
    }
    case ProfileMoment::second: {
      // chi_cd = -(b k_c k_d + a delta_cd); averages <u> = 1/3, <u^2> = 1/5, <k_c^2 k_d^2> = kappa^4/15.
      const double a = p.radial_d1_over_kappa(kappa);
      const double b = p.radial_curvature(kappa) * kappa * kappa;
      const double diag = b * b / 5.0 + 2.0 * a * b / 3.0 + a * a;
      const double off = b * b / 15.0;
      return std::max(diag, off);
    }
  }
  return 0.0;
}

template <class Weight>
double radial_integral(const ChargeProfile& p, ProfileMoment m, Weight&& w, double k_hi) {
  auto f = [&](double kappa) { return w(kappa) * angular_average_sq(p, m, kappa) * kappa * kappa; };
  if (p.shape() == ChargeProfile::Shape::gaussian) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
  }
  // Piecewise over the table; tanh-sinh on the first cell copes with an
  // integrable singularity at the origin.
  const auto& kap = p.table()->kappa;
  boost::math::quadrature::tanh_sinh<double> ts;
  double acc = ts.integrate(f, kap[0], kap[1]);
  for (std::size_t i = 1; i + 1 < kap.size() && kap[i] < k_hi; ++i)
    acc += boost::math::quadrature::gauss<double, 20>::integrate(f, kap[i], std::min(kap[i + 1], k_hi));
  return acc;
}

}  // namespace detail

/// Squared homogeneous whole-space norm (2 pi)^-3 integral |k|^(2 index)
/// |transform|^2 dk. No upper limit on the index (profiles are smooth); the
/// lower limit is set by integrability at k = 0.
inline double homogeneous_profile_norm_sq(const ChargeProfile& p, double index,
                                          ProfileMoment m = ProfileMoment::none) {
  if (m != ProfileMoment::none && !p.has_moments())
    throw DomainError("profile norm: moment transforms unavailable for this profile");
  if (p.total_weight() != 0.0 && !(detail::small_k_power(m, index) > -1.0))
    throw DomainError("profile norm diverges in " + detail::space_label(true, index) +
                      ": integrand not integrable at k = 0");
  if (p.shape() == ChargeProfile::Shape::gaussian) {
    const double s2 = p.sigma() * p.sigma();
    const double A2 = p.total_weight() * p.total_weight();
    const double pre = detail::radial_prefactor * A2;
    const double base = 2.0 * index + 2.0;
    auto I = [&](double pw) { return detail::gaussian_moment(pw, s2); };
    switch (m) {
      case ProfileMoment::none: return pre * I(base);
      case ProfileMoment::first: return pre * s2 * s2 / 3.0 * I(base + 2.0);
      case ProfileMoment::second: {
        const double s4 = s2 * s2;
        const double diag = s4 * I(base) - 2.0 / 3.0 * s4 * s2 * I(base + 2.0) + s4 * s4 / 5.0 * I(base + 4.0);
        const double off = s4 * s4 / 15.0 * I(base + 4.0);
        return pre * std::max(diag, off);
      }
    }
  }
  return detail::radial_prefactor * detail::radial_integral(
                                        p, m, [index](double k) { return k == 0.0 ? 0.0 : std::pow(k, 2.0 * index); },
                                        p.kappa_max());
}

/// Squared nonhomogeneous whole-space norm (2 pi)^-3 integral (1+|k|^2)^r
/// |transform|^2 dk.
inline double sobolev_profile_norm_sq(const ChargeProfile& p, double r, ProfileMoment m = ProfileMoment::none) {
  if (!(r >= 0.0)) throw DomainError("profile norm: r must be >= 0");
  if (m != ProfileMoment::none && !p.has_moments())
    throw DomainError("profile norm: moment transforms unavailable for this profile");
  return detail::radial_prefactor *
         detail::radial_integral(p, m, [r](double k) { return std::pow(1.0 + k * k, r); }, p.kappa_max());
}

/// Norm of phi in the given Sobolev space (whole-space value).
inline double profile_norm(const ChargeProfile& p, SobolevIndex idx) {
  return idx.kind == SobolevIndex::Kind::homogeneous ? std::sqrt(homogeneous_profile_norm_sq(p, idx.value))
                                                     : std::sqrt(sobolev_profile_norm_sq(p, idx.value));
}

struct NormEntry {
  std::string space;
  bool homogeneous = true;
  double index = 0.0;
  ProfileMoment moment = ProfileMoment::none;
  double value = 0.0;
  /// Bound on the error from the tabulated tail (0 for closed forms).
  double error_bound = 0.0;
};

/// Profile norms needed by a run at homogeneous index s and nonhomogeneous
/// index r, and their maximum M over the four homogeneous spaces
/// Hdot^-s, Hdot^(1-s), Hdot^s, Hdot^(s+1).
struct NormTable {
  double s = 0.0;
  double r = 0.0;
  double minus_s = 0.0;      // ||phi||_{Hdot^-s}
  double one_minus_s = 0.0;  // ||phi||_{Hdot^(1-s)}
  double plus_s = 0.0;       // ||phi||_{Hdot^s}
  double s_plus_one = 0.0;   // ||phi||_{Hdot^(s+1)}
  double h_r = 0.0;          // ||phi||_{H^r}
  double h_1 = 0.0;          // ||phi||_{H^1}
  double M = 0.0;
  std::vector<NormEntry> entries;
};

inline NormTable build_norm_table(const ChargeProfile& p, double s, double r = 0.0, bool with_moments = false,
                                  double k_cut = 0.0) {
  SobolevIndex::homogeneous(s);
  SobolevIndex::nonhomogeneous(r);
  NormTable t;
  t.s = s;
  t.r = r;
  auto tail_bound = [&](bool homog, double index) {
    if (p.shape() == ChargeProfile::Shape::gaussian) return 0.0;
    const double lo = p.kappa_max();
    const double hi = std::max(lo, k_cut);
    if (hi <= lo || p.table()->decay_bound == 0.0) return 0.0;
    auto w = [&](double k) { return homog ? std::pow(k, 2.0 * index) : std::pow(1.0 + k * k, index); };
    const double integral = boost::math::quadrature::gauss<double, 20>::integrate(
        [&](double k) { return w(k) * k * k; }, lo, hi);
    return std::sqrt(detail::radial_prefactor * integral) * p.table()->decay_bound;
  };
  auto add = [&](bool homog, double index, ProfileMoment m) {
    NormEntry e;
    e.homogeneous = homog;
    e.index = index;
    e.moment = m;
    const std::string base = detail::space_label(homog, index);
    e.space = m == ProfileMoment::none ? base : (m == ProfileMoment::first ? "x*phi in " : "xx*phi in ") + base;
    e.value = std::sqrt(homog ? homogeneous_profile_norm_sq(p, index, m) : sobolev_profile_norm_sq(p, index, m));
    e.error_bound = tail_bound(homog, index);
    t.entries.push_back(e);
    return e.value;
  };
  t.minus_s = add(true, -s, ProfileMoment::none);
  t.one_minus_s = add(true, 1.0 - s, ProfileMoment::none);
  t.plus_s = add(true, s, ProfileMoment::none);
  t.s_plus_one = add(true, s + 1.0, ProfileMoment::none);
  t.h_r = add(false, r, ProfileMoment::none);
  t.h_1 = add(false, 1.0, ProfileMoment::none);
  t.M = std::max({t.minus_s, t.one_minus_s, t.plus_s, t.s_plus_one});
  if (with_moments) {
    for (double idx : {-s, 1.0 - s, s, s + 1.0})
      for (ProfileMoment m : {ProfileMoment::first, ProfileMoment::second}) t.M = std::max(t.M, add(true, idx, m));
  }
  return t;
}

/// The profile sampled on a grid: phi_hat and the radial data of the moment
/// kernels for every active mode (zero on Nyquist planes).
class ProfileOnGrid {
public:
  ProfileOnGrid(ChargeProfile profile, Grid grid)
      : profile_(std::move(profile)), grid_(std::move(grid)), phihat_(grid_.size(), 0.0) {
    const bool moments = profile_.has_moments();
    if (moments) {
      d1_.assign(grid_.size(), 0.0);
      curv_.assign(grid_.size(), 0.0);
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (!grid_.active(i)) continue;
      const double kn = grid_.knorm(i);
      phihat_[i] = profile_.radial(kn);
      if (moments) {
        d1_[i] = profile_.radial_d1_over_kappa(kn);
        curv_[i] = profile_.radial_curvature(kn);
      }
    }
  }

  const ChargeProfile& profile() const noexcept { return profile_; }
  const Grid& grid() const noexcept { return grid_; }
  double charge() const noexcept { return profile_.charge(); }
  bool has_moments() const noexcept { return !d1_.empty(); }

  double phihat(std::size_t i) const noexcept { return phihat_[i]; }
  const std::vector<double>& phihat() const noexcept { return phihat_; }

  /// Transform of x_i phi at mode idx.
  Vec3c first_moment(std::size_t idx) const {
    return (Complex(0.0, 1.0) * d1_[idx]) * grid_.k(idx).cast<Complex>();
  }
  /// Transform of x_i x_j phi at mode idx.
  Mat3c second_moment(std::size_t idx) const {
    const Vec3& k = grid_.k(idx);
    const Mat3 m = curv_[idx] * (k * k.transpose()) + d1_[idx] * Mat3::Identity();
    return (-m).cast<Complex>();
  }
  double d1_over_kappa(std::size_t idx) const noexcept { return d1_[idx]; }
  double curvature(std::size_t idx) const noexcept { return curv_[idx]; }

private:
  ChargeProfile profile_;
  Grid grid_;
  std::vector<double> phihat_;
  std::vector<double> d1_;
  std::vector<double> curv_;
};

/// Discrete analogue of the homogeneous profile norm on the torus:
/// L^-3 sum_{k != 0} |k|^(2 index) phi_hat(k)^2, plus phi_hat(0)^2 / L^3 when
/// index = 0. These are the constants for which the smearing and Lemma bounds
/// hold exactly on the grid.
inline double torus_profile_norm(const ProfileOnGrid& pg, double index) {
  const Grid& g = pg.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const double kn = g.knorm(i);
    const double p2 = pg.phihat(i) * pg.phihat(i);
    if (kn < g.k_epsilon()) {
      if (index == 0.0) acc += p2;
      continue;
    }
    acc += std::pow(kn, 2.0 * index) * p2;
  }
  return std::sqrt(acc / g.volume());
}

}  // namespace mnsim
