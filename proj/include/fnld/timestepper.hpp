#pragma once

// Backward product-integration scheme for
//
//   d/dt (k * (u - u0))(t) + A u(t) = f(t),   u(0) = u0,
//
// with A a symmetric positive semidefinite matrix whose off-diagonal entries
// are non-positive and whose row sums are non-negative (an M-matrix, e.g. the
// discrete fractional Laplacian). The memory term uses the exact cell
// integrals a_j of the kernel: with v = u - u0 and v^0 = 0,
//
//   D_n v = (1/tau) sum_{j=1..n} a_{n-j} (v^j - v^{j-1})
//         = (1/tau) [ a_0 v^n - sum_{j=1..n-1} d_{n-j} v^j ],
//
// d_m = a_{m-1} - a_m >= 0. This is the backward difference in time of the
// exact convolution of k with the piecewise-constant-from-the-right
// interpolant of v, so it is exact on such interpolants by construction.
// Step n solves
//
//   ((a_0/tau) I + A) u^n = f^n + (a_0/tau) u^0
//                         + (1/tau) sum_{j=1..n-1} d_{n-j} (u^j - u^0).
//
// All right-hand-side weights are non-negative, and the system matrix is an
// M-matrix, so non-negative data produce non-negative solutions and the map
// from data to solution is monotone; those structural facts carry the
// comparison and approximation tests.

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "grids.hpp"
#include "kernels.hpp"
#include "scalar_functions.hpp"

namespace fnld {

struct SchemeWeights {
  double tau = 0.0;
  std::vector<double> a;  // cell integrals of the kernel, a[0] over (0,tau)
  std::vector<double> d;  // d[m] = a[m-1] - a[m] for m >= 1; d[0] unused = 0

  SchemeWeights() = default;

  SchemeWeights(double tau_, std::span<const double> cells) : tau(tau_) {
    if (!(tau > 0.0)) throw std::domain_error("SchemeWeights: tau must be positive");
    if (cells.empty()) throw std::domain_error("SchemeWeights: need at least one cell");
    a.assign(cells.begin(), cells.end());
    if (!(a[0] > 0.0)) throw std::domain_error("SchemeWeights: leading cell must be positive");
    d.assign(a.size(), 0.0);
    // cells computed as antiderivative differences wobble by an ulp of the
    // running prefix, so the monotonicity slack must track that magnitude
    double prefix = a[0];
    for (std::size_t m = 1; m < a.size(); ++m) {
      d[m] = a[m - 1] - a[m];
      prefix += a[m];
      if (d[m] < -(1e-14 * a[0] + 8.0 * std::numeric_limits<double>::epsilon() * prefix))
        throw std::invalid_argument("SchemeWeights: kernel cell integrals must be non-increasing");
      if (d[m] < 0.0) d[m] = 0.0;
    }
  }

  SchemeWeights(const KernelSpec& k, const TimeGrid& grid)
      : SchemeWeights(grid.tau(), cell_integrals(k, grid.tau(), grid.n).a) {}

  int steps() const { return static_cast<int>(a.size()); }
};

// Discrete memory operator applied to a trajectory. V has one column per
// time level, column 0 included; column n of the result is
// (1/tau) sum_{j=1..n} a_{n-j} (V^j - V^{j-1}) for n = 1..steps, i.e. the
// backward difference of the exact convolution with the piecewise-constant
// interpolant of V - V^0 (plus the a_{n-1} V^0 / tau term when V^0 != 0 is
// meant as data; callers subtract the base level as needed).
inline Eigen::MatrixXd memory_apply(const SchemeWeights& w, const Eigen::MatrixXd& V) {
  const int n = static_cast<int>(V.cols()) - 1;
  if (n < 1) throw std::invalid_argument("memory_apply: need at least two time levels");
  if (n > w.steps()) throw std::invalid_argument("memory_apply: more levels than weights");
  Eigen::MatrixXd D(V.rows(), n);
  for (int m = 1; m <= n; ++m) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(V.rows());
    for (int j = 1; j <= m; ++j) acc += w.a[m - j] * (V.col(j) - V.col(j - 1));
    D.col(m - 1) = acc / w.tau;
  }
  return D;
}

struct ProblemData {
  Eigen::VectorXd u0;
  Eigen::MatrixXd f;  // one column per step (f at t_1..t_n); empty means zero
  bool allow_signed = false;
};

struct SolveResult {
  Eigen::MatrixXd U;                 // one column per time level, col 0 = u0
  std::vector<double> step_residual; // max-norm residual of each linear solve
};

inline SolveResult solve(const SchemeWeights& w, const Eigen::MatrixXd& A,
                         const ProblemData& data) {
  const int N = static_cast<int>(A.rows());
  const int n = w.steps();
  if (A.cols() != N) throw std::invalid_argument("solve: A must be square");
  if (data.u0.size() != N) throw std::invalid_argument("solve: u0 size mismatch");
  const bool has_f = data.f.size() > 0;
  if (has_f && (data.f.rows() != N || data.f.cols() < n))
    throw std::invalid_argument("solve: f must have one column per step");
  if (!data.allow_signed) {
    if (data.u0.minCoeff() < 0.0)
      throw std::invalid_argument("solve: u0 must be non-negative (or set allow_signed)");
    if (has_f && data.f.leftCols(n).minCoeff() < 0.0)
      throw std::invalid_argument("solve: f must be non-negative (or set allow_signed)");
  }

  const double r = w.a[0] / w.tau;
  Eigen::MatrixXd M = A;
  M.diagonal().array() += r;
  Eigen::LDLT<Eigen::MatrixXd> fact(M);
  if (fact.info() != Eigen::Success) throw std::runtime_error("solve: factorisation failed");

  SolveResult out;
  out.U.resize(N, n + 1);
  out.U.col(0) = data.u0;
  out.step_residual.resize(n);
  for (int m = 1; m <= n; ++m) {
    Eigen::VectorXd rhs = r * data.u0;
    if (has_f) rhs += data.f.col(m - 1);
    for (int j = 1; j < m; ++j)
      rhs += (w.d[m - j] / w.tau) * (out.U.col(j) - data.u0);
    const Eigen::VectorXd u = fact.solve(rhs);
    out.U.col(m) = u;
    out.step_residual[m - 1] = (M * u - rhs).cwiseAbs().maxCoeff();
  }
  return out;
}

// Solutions for the data truncated at increasing levels, plus the untruncated
// one in the last slot. Along the ladder the data increase, so by the
// monotonicity of the scheme the solutions increase as well.
struct ApproxLadder {
  std::vector<double> levels;
  std::vector<SolveResult> runs;  // runs.back() is the untruncated solution
};

inline ApproxLadder approx_driver(const SchemeWeights& w, const Eigen::MatrixXd& A,
                                  const ProblemData& data, std::span<const double> levels) {
  if (levels.empty()) throw std::invalid_argument("approx_driver: need at least one level");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (!(levels[i] >= levels[i - 1]))
      throw std::invalid_argument("approx_driver: levels must be non-decreasing");
  ApproxLadder out;
  out.levels.assign(levels.begin(), levels.end());
  for (double K : levels) {
    ProblemData cut = data;
    for (double& x : cut.u0) x = truncate(x, K);
    for (int j = 0; j < cut.f.cols(); ++j)
      for (int i = 0; i < cut.f.rows(); ++i) cut.f(i, j) = truncate(cut.f(i, j), K);
    out.runs.push_back(solve(w, A, cut));
  }
  out.runs.push_back(solve(w, A, data));
  return out;
}

}  // namespace fnld
