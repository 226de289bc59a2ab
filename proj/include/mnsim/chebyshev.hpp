#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "mnsim/errors.hpp"

namespace mnsim {

/// Chebyshev-Gauss-Lobatto collocation on [-1, 1] with q + 1 nodes in
/// increasing order, x_j = -cos(pi j / q), and the exact integration matrices
/// of the interpolating polynomial measured from an anchor node m:
///
///   Q1(i, j) = integral_{x_m}^{x_i} l_j(x) dx
///   Q2(i, j) = integral_{x_m}^{x_i} (x_i - x) l_j(x) dx
///
/// where l_j are the Lagrange cardinal functions. Q1 is Clenshaw-Curtis
/// quadrature on every subinterval.
class ChebyshevRule {
public:
  ChebyshevRule(int q, int anchor) : q_(q), m_(anchor) {
    if (q < 2) throw DomainError("collocation: q must be >= 2");
    if (anchor < 0 || anchor > q) throw DomainError("collocation: anchor node out of range");
    build();
  }

  int order() const noexcept { return q_; }
  int anchor() const noexcept { return m_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(q_ + 1); }
  double node(std::size_t j) const noexcept { return x_[j]; }
  const std::vector<double>& nodes() const noexcept { return x_; }
  const Eigen::MatrixXd& Q1() const noexcept { return q1_; }
  const Eigen::MatrixXd& Q2() const noexcept { return q2_; }
  /// Barycentric weights of the nodes.
  const std::vector<double>& bary() const noexcept { return w_; }

  /// Value at x of the interpolant through values f_j (any vector type).
  template <class T>
  T interpolate(const std::vector<T>& f, double x) const {
    for (std::size_t j = 0; j < x_.size(); ++j)
      if (x == x_[j]) return f[j];
    double den = 0.0;
    T num = f[0] * 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
      const double c = w_[j] / (x - x_[j]);
      num = num + c * f[j];
      den += c;
    }
    return num * (1.0 / den);
  }

private:
  static double cheb_t(int n, double x) { return std::cos(n * std::acos(std::max(-1.0, std::min(1.0, x)))); }

  void build() {
    const int q = q_;
    const std::size_t n = size();
    x_.resize(n);
    for (int j = 0; j <= q; ++j) x_[static_cast<std::size_t>(j)] = -std::cos(std::numbers::pi * j / q);
    if (q % 2 == 0) x_[static_cast<std::size_t>(q / 2)] = 0.0;

    w_.resize(n);
    for (int j = 0; j <= q; ++j) w_[static_cast<std::size_t>(j)] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == q) ? 0.5 : 1.0);

    // Chebyshev values T_n(x) on the nodes, exact for the node set.
    auto T = [&](int deg, std::size_t j) {
      return std::cos(deg * std::numbers::pi * static_cast<double>(q - static_cast<int>(j)) / q);
    };
    auto cbar = [q](int k) { return (k == 0 || k == q) ? 2.0 : 1.0; };

    q1_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    q2_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (int j = 0; j <= q; ++j) {
      // l_j = sum_k a_k T_k.
      std::vector<double> a(static_cast<std::size_t>(q + 3), 0.0);
      for (int k = 0; k <= q; ++k)
        a[static_cast<std::size_t>(k)] = 2.0 * T(k, static_cast<std::size_t>(j)) / (q * cbar(k) * cbar(j));
      const std::vector<double> b = antiderivative(a);
      const std::vector<double> c = antiderivative(b);
      auto eval = [&](const std::vector<double>& coef, double x) {
        double s = 0.0;
        for (std::size_t k = 0; k < coef.size(); ++k) s += coef[k] * cheb_t(static_cast<int>(k), x);
        return s;
      };
      const double xm = x_[static_cast<std::size_t>(m_)];
      const double Fm = eval(b, xm), Gm = eval(c, xm);
      for (int i = 0; i <= q; ++i) {
        const double xi = x_[static_cast<std::size_t>(i)];
        q1_(i, j) = i == m_ ? 0.0 : eval(b, xi) - Fm;
        q2_(i, j) = i == m_ ? 0.0 : eval(c, xi) - Gm - (xi - xm) * Fm;
      }
    }
  }

  /// Chebyshev coefficients of an antiderivative (constant term left zero).
  static std::vector<double> antiderivative(const std::vector<double>& a) {
    std::vector<double> b(a.size() + 1, 0.0);
    auto at = [&](std::size_t k) { return k < a.size() ? a[k] : 0.0; };
    for (std::size_t k = 1; k < b.size(); ++k) {
      const double prev = k == 1 ? 2.0 * at(0) : at(k - 1);
      b[k] = (prev - at(k + 1)) / (2.0 * static_cast<double>(k));
    }
    return b;
  }

  int q_;
  int m_;
  std::vector<double> x_;
  std::vector<double> w_;
  Eigen::MatrixXd q1_;
  Eigen::MatrixXd q2_;
};

}  // namespace mnsim
