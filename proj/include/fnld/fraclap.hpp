#pragma once

// One-dimensional fractional Laplacian of order s in (0,1) on an interval,
// with the zero exterior condition built in.
//
// The discrete operator acts on interior nodal values. Row i approximates
//
//   C(1,s) P.V. int_R (u(x_i) - u(y)) |x_i - y|^{-1-2s} dy,
//
// with u piecewise linear through the nodal values inside the interval, zero
// outside, except on the near region (x_i - h, x_i + h) where the integral
// is regularised through the quadratic touching the three local values: the
// odd part cancels in the principal value and the singular moment integrates
// to sigma_s (2u_i - u_{i-1} - u_{i+1}), sigma_s = h^{-2s} / (2 - 2s). Every
// other contribution is an exact integral of a hat function against the
// kernel, so the matrix is symmetric Toeplitz by construction, with
// non-positive off-diagonal entries and strictly positive row sums (the
// exterior tail): an M-matrix.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "grids.hpp"

namespace fnld {

// C(1,s) = 4^s s Gamma(s + 1/2) / (sqrt(pi) Gamma(1 - s)); C(1, 1/2) = 1/pi.
inline double fraclap_constant(double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("fraclap_constant: s must lie in (0,1)");
  return std::pow(4.0, s) * s * std::tgamma(s + 0.5) /
         (std::sqrt(std::numbers::pi) * std::tgamma(1.0 - s));
}

// Closed-form value of the operator on the profile (1 - x^2)^s_+ over (-1,1):
// a constant inside the interval.
inline double flat_profile_constant(double s) {
  if (!(s > 0.0 && s < 1.0))
    throw std::domain_error("flat_profile_constant: s must lie in (0,1)");
  return std::pow(2.0, 2.0 * s) * std::tgamma(1.0 + s) * std::tgamma(0.5 + s) /
         std::sqrt(std::numbers::pi);
}

struct NonlocalOperator {
  double s = 0.5;
  SpaceGrid1D grid;
  double constant = 0.0;  // C(1,s)
  Eigen::MatrixXd A;      // dense symmetric Toeplitz
};

inline NonlocalOperator assemble_fraclap(double s, const SpaceGrid1D& grid) {
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("assemble_fraclap: s must lie in (0,1)");
  const int N = grid.N;
  const double h = grid.h();
  const double C = fraclap_constant(s);

  // I0(p,q) = int_p^q v^{-1-2s} dv, I1(p,q) = int_p^q v^{-2s} dv (log at s=1/2)
  const auto I0 = [s](double p, double q) {
    return (std::pow(p, -2.0 * s) - std::pow(q, -2.0 * s)) / (2.0 * s);
  };
  const auto I1 = [s](double p, double q) {
    if (s == 0.5) return std::log(q / p);
    return (std::pow(q, 1.0 - 2.0 * s) - std::pow(p, 1.0 - 2.0 * s)) / (1.0 - 2.0 * s);
  };

  const double hpow = std::pow(h, -2.0 * s);
  const double sigma = hpow / (2.0 - 2.0 * s);
  // far half of the adjacent hat: int_1^2 (2 - v) v^{-1-2s} dv
  const double g1 = hpow * (2.0 * I0(1.0, 2.0) - I1(1.0, 2.0));
  // full hat at lag m >= 2: int_0^1 (1-w)[(m-w)^{-1-2s} + (m+w)^{-1-2s}] dw
  std::vector<double> hat(static_cast<std::size_t>(std::max(0, N - 2)));
  for (int m = 2; m < N; ++m) {
    const double p1 = (1.0 - m) * I0(m - 1.0, m) + I1(m - 1.0, m);
    const double p2 = (1.0 + m) * I0(m, m + 1.0) - I1(m, m + 1.0);
    hat[m - 2] = hpow * (p1 + p2);
  }

  NonlocalOperator op;
  op.s = s;
  op.grid = grid;
  op.constant = C;
  op.A.resize(N, N);
  const double diag = C * (2.0 * sigma + hpow / s);
  const double adj = -C * (sigma + g1);
  for (int i = 0; i < N; ++i) {
    op.A(i, i) = diag;
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      const int m = std::abs(i - j);
      op.A(i, j) = (m == 1) ? adj : -C * hat[m - 2];
    }
  }
  return op;
}

inline Eigen::VectorXd apply(const NonlocalOperator& op, const Eigen::VectorXd& u) {
  if (u.size() != op.A.rows()) throw std::invalid_argument("apply: size mismatch");
  return op.A * u;
}

// Discrete Dirichlet pairing h u^T A u ~ <(-Delta)^s u, u>_{L^2}.
inline double energy(const NonlocalOperator& op, const Eigen::VectorXd& u) {
  if (u.size() != op.A.rows()) throw std::invalid_argument("energy: size mismatch");
  return op.grid.h() * u.dot(op.A * u);
}

}  // namespace fnld
