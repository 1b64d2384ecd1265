#pragma once

// Structure checks for discrete solutions of
//
//   d/dt (k * (u - u0))(t) + A u(t) = f(t).
//
// Three layers, in increasing strength of what they certify:
//
//  * weak_residual: the discrete weak formulation. Multiplying the scheme by
//    zeta(t_n) w and summing by parts in time gives an identity that any
//    trajectory produced by the scheme satisfies to rounding; a corrupted
//    field breaks it by O(perturbation).
//
//  * fundamental_identity / truncation brackets: for a bounded kernel, the
//    chain-rule defect of the memory operator is an exact non-negative
//    combination of convexity brackets,
//
//      H'(u^n) D(u)_n - D(H o u)_n
//        = (1/tau) [ a_{n-1} B_0 + sum_{j=1..n-1} (a_{n-1-j} - a_{n-j}) B_j ],
//      B_j = H(u^j) - H(u^n) - H'(u^n)(u^j - u^n) >= 0 for convex H,
//
//    with non-increasing cells a_j. Both the identity (algebraic, to
//    rounding) and the sign of the slack are checkable.
//
//  * entropy_residual: the inequality formulation tested against a kernel
//    split k = k1 + k2 at a cut time, a saturating odd nonlinearity S with
//    primitive SInt, a spatial test profile phi and a cutoff zeta vanishing
//    at the horizon:
//
//      - sum_n tau zeta'(t_n) h sum_i (k1-cells * Psi)_i^n
//      + sum_n tau zeta(t_n)  h sum_i S(u_i^n - phi_i) D2(u - u0)_i^n
//      + sum_n tau zeta(t_n)  h <S(u^n - phi), A u^n>
//     <= sum_n tau zeta(t_n)  h sum_i f_i^n S(u_i^n - phi_i) + O(tau^p),
//
//    Psi = SInt(u - phi) - SInt(u0 - phi). The O(tau^p) allowance (p tied to
//    the kernel exponent) absorbs the first-order skew between the discrete
//    and continuous summation by parts; its constant is calibrated once and
//    frozen by the callers.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "grids.hpp"
#include "kernels.hpp"
#include "scalar_functions.hpp"
#include "timestepper.hpp"

namespace fnld {

// cutoff (1 - t/T)^q, non-negative on [0,T] and vanishing at T
struct ZetaPoly {
  double T = 1.0;
  int q = 1;

  ZetaPoly(double T_, int q_) : T(T_), q(q_) {
    if (!(T > 0.0)) throw std::domain_error("ZetaPoly: horizon must be positive");
    if (q < 1) throw std::domain_error("ZetaPoly: exponent must be at least 1");
  }

  double value(double t) const { return std::pow(1.0 - t / T, q); }
  double deriv(double t) const {
    return -static_cast<double>(q) / T * std::pow(1.0 - t / T, q - 1);
  }
};

// convex primitive of the hard truncation: y^2/2 inside, linear growth outside
struct TruncationPrimitive {
  double K = 1.0;

  explicit TruncationPrimitive(double K_) : K(K_) {
    if (!(K >= 0.0)) throw std::domain_error("TruncationPrimitive: level must be non-negative");
  }

  double value(double y) const {
    const double a = std::fabs(y);
    return a <= K ? 0.5 * y * y : K * a - 0.5 * K * K;
  }
  double deriv(double y) const { return truncate(y, K); }
};

struct IdentityReport {
  double max_mismatch = 0.0;  // | lhs - rhs - bracket |, worst over steps
  double min_slack = 0.0;     // smallest bracket combination (>= 0 for convex H)
  double scale = 0.0;         // largest |lhs| seen, for relative comparisons
};

// Exact discrete chain-rule identity for a bounded-kernel memory operator
// applied to a scalar trajectory u^0..u^n. H must be convex with derivative
// Hd for the slack to be one-signed; the identity itself is pure algebra.
template <class HV, class HD>
IdentityReport fundamental_identity(const SchemeWeights& w, std::span<const double> u,
                                    HV&& H, HD&& Hd) {
  const int n = static_cast<int>(u.size()) - 1;
  if (n < 1) throw std::invalid_argument("fundamental_identity: need at least two levels");
  if (n > w.steps()) throw std::invalid_argument("fundamental_identity: more levels than weights");

  IdentityReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  std::vector<double> Hu(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) Hu[j] = H(u[j]);

  for (int m = 1; m <= n; ++m) {
    double du = 0.0, dH = 0.0;
    for (int j = 1; j <= m; ++j) {
      du += w.a[m - j] * (u[j] - u[j - 1]);
      dH += w.a[m - j] * (Hu[j] - Hu[j - 1]);
    }
    const double hd = Hd(u[m]);
    const double lhs = hd * du / w.tau;

    auto bracket = [&](int j) { return Hu[j] - Hu[m] - hd * (u[j] - u[m]); };
    double slack = w.a[m - 1] * bracket(0);
    for (int j = 1; j < m; ++j) slack += (w.a[m - 1 - j] - w.a[m - j]) * bracket(j);
    slack /= w.tau;

    rep.max_mismatch = std::max(rep.max_mismatch, std::fabs(lhs - dH / w.tau - slack));
    rep.min_slack = std::min(rep.min_slack, slack);
    rep.scale = std::max(rep.scale, std::fabs(lhs));
  }
  return rep;
}

// Same, but builds the weights from a kernel, which must be bounded at the
// origin: the identity is a statement about absolutely continuous kernels
// and has no direct meaning for a singular one.
template <class HV, class HD>
IdentityReport fundamental_identity(const KernelSpec& k, const TimeGrid& grid,
                                    std::span<const double> u, HV&& H, HD&& Hd) {
  if (k.singular_at_origin())
    throw std::invalid_argument(
        "fundamental_identity: kernel is singular at the origin; use a bounded "
        "regularisation or a bounded tabulated kernel");
  return fundamental_identity(SchemeWeights(k, grid), u, std::forward<HV>(H),
                              std::forward<HD>(Hd));
}

// Discrete weak formulation tested against a spatial profile w and cutoff
// zeta. For a trajectory produced by the scheme this is zero to rounding.
struct WeakReport {
  double residual = 0.0;
  double scale = 0.0;  // sum of absolute contributions, for normalisation
};

inline WeakReport weak_residual(const SchemeWeights& wts, const Eigen::MatrixXd& A,
                                const TimeGrid& grid, const Eigen::MatrixXd& U,
                                const Eigen::MatrixXd& f, const Eigen::VectorXd& w,
                                const ZetaPoly& zeta) {
  const int N = static_cast<int>(A.rows());
  const int n = grid.n;
  if (U.rows() != N || U.cols() != n + 1)
    throw std::invalid_argument("weak_residual: trajectory shape mismatch");
  if (f.size() > 0 && (f.rows() != N || f.cols() < n))
    throw std::invalid_argument("weak_residual: forcing shape mismatch");
  if (w.size() != N) throw std::invalid_argument("weak_residual: profile size mismatch");
  if (n > wts.steps()) throw std::invalid_argument("weak_residual: more steps than weights");
  if (std::fabs(zeta.T - grid.T) > 1e-12 * grid.T)
    throw std::invalid_argument("weak_residual: cutoff horizon differs from the grid");

  const double tau = grid.tau();

  // G_n = (k-cells * (u - u0))(t_n) against the profile
  std::vector<double> G(n + 1, 0.0);
  for (int m = 1; m <= n; ++m) {
    double acc = 0.0;
    for (int j = 1; j <= m; ++j) acc += wts.a[m - j] * w.dot(U.col(j) - U.col(0));
    G[m] = acc;
  }

  double res = 0.0, scale = 0.0;
  for (int m = 1; m < n; ++m) {
    const double dz = zeta.value(grid.node(m + 1)) - zeta.value(grid.node(m));
    res -= dz * G[m];
    scale += std::fabs(dz * G[m]);
  }
  for (int m = 1; m <= n; ++m) {
    double term = tau * zeta.value(grid.node(m)) * w.dot(A * U.col(m));
    if (f.size() > 0) term -= tau * zeta.value(grid.node(m)) * w.dot(f.col(m - 1));
    res += term;
    scale += std::fabs(term);
  }
  WeakReport rep;
  rep.residual = res;
  rep.scale = std::max(scale, 1e-300);
  return rep;
}

struct EntropyResult {
  double term_memory_head = 0.0;  // -sum tau zeta' h (k1 * Psi)
  double term_memory_tail = 0.0;  // sum tau zeta h S(u - phi) D2(u - u0)
  double term_diffusion = 0.0;    // sum tau zeta h <S(u - phi), A u>
  double term_forcing = 0.0;      // sum tau zeta h f S(u - phi)
  double residual() const {
    return term_memory_head + term_memory_tail + term_diffusion - term_forcing;
  }
  double scale() const {
    return std::max({std::fabs(term_memory_head), std::fabs(term_memory_tail),
                     std::fabs(term_diffusion), std::fabs(term_forcing), 1.0});
  }
};

inline EntropyResult entropy_residual(const KernelSplit& split, const TimeGrid& grid,
                                      double h, const Eigen::MatrixXd& A,
                                      const Eigen::MatrixXd& U, const Eigen::MatrixXd& f,
                                      const Eigen::VectorXd& phi, const SmoothSign& S,
                                      const ZetaPoly& zeta) {
  const int N = static_cast<int>(A.rows());
  const int n = grid.n;
  if (U.rows() != N || U.cols() != n + 1)
    throw std::invalid_argument("entropy_residual: trajectory shape mismatch");
  if (f.size() > 0 && (f.rows() != N || f.cols() < n))
    throw std::invalid_argument("entropy_residual: forcing shape mismatch");
  if (phi.size() != N) throw std::invalid_argument("entropy_residual: profile size mismatch");
  if (!(h > 0.0)) throw std::invalid_argument("entropy_residual: cell width must be positive");
  if (std::fabs(zeta.T - grid.T) > 1e-12 * grid.T)
    throw std::invalid_argument("entropy_residual: cutoff horizon differs from the grid");

  const double tau = grid.tau();
  const std::vector<double> a1 = split.cells1(tau, n).a;
  const std::vector<double> a2 = split.cells2(tau, n).a;

  // Psi^j = SInt(u^j - phi) - SInt(u0 - phi), Psi^0 = 0
  Eigen::MatrixXd Psi(N, n + 1);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i < N; ++i)
      Psi(i, j) = S.antideriv(U(i, j) - phi[i]) - S.antideriv(U(i, 0) - phi[i]);

  // singular-head part: -sum_n tau zeta'(t_n) h sum_i (a1 * Psi)_i^n
  EntropyResult out;
  for (int m = 1; m <= n; ++m) {
    double conv = 0.0;
    for (int j = 1; j <= m; ++j) conv += a1[m - j] * Psi.col(j).sum();
    out.term_memory_head -= tau * zeta.deriv(grid.node(m)) * h * conv;
  }

  // bounded-tail part through the memory operator on u - u0
  SchemeWeights w2(tau, a2);
  Eigen::MatrixXd V = U;
  for (int j = 0; j <= n; ++j) V.col(j) -= U.col(0);
  const Eigen::MatrixXd D2 = memory_apply(w2, V);

  for (int m = 1; m <= n; ++m) {
    const double z = zeta.value(grid.node(m));
    double dot2 = 0.0, dot3 = 0.0, dotf = 0.0;
    const Eigen::VectorXd Au = A * U.col(m);
    for (int i = 0; i < N; ++i) {
      const double sv = S.value(U(i, m) - phi[i]);
      dot2 += sv * D2(i, m - 1);
      dot3 += sv * Au[i];
      if (f.size() > 0) dotf += sv * f(i, m - 1);
    }
    out.term_memory_tail += tau * z * h * dot2;
    out.term_diffusion += tau * z * h * dot3;
    out.term_forcing += tau * z * h * dotf;
  }
  return out;
}

// ------------------------------------------------------------------
// comparison and L1 structure between two solutions of the same scheme

struct ComparisonReport {
  bool data_ordered = false;   // data1 <= data2 componentwise
  double ordered_slack = 0.0;  // min of U2 - U1 over all nodes (if ordered)
  double l1_slack = 0.0;       // min over n of majorant mass - |u1 - u2| mass
  double contraction_slack = 0.0;  // min over n of |du0| mass - |du^n| mass (f1 == f2)
  bool forcing_equal = false;
};

inline ComparisonReport comparison_check(const SchemeWeights& w, const Eigen::MatrixXd& A,
                                         const ProblemData& d1, const ProblemData& d2,
                                         double h) {
  auto r1 = solve(w, A, d1);
  auto r2 = solve(w, A, d2);
  const int n = w.steps();
  const int N = static_cast<int>(A.rows());

  ComparisonReport rep;
  rep.data_ordered = (d2.u0 - d1.u0).minCoeff() >= 0.0;
  if (d1.f.size() > 0 || d2.f.size() > 0) {
    Eigen::MatrixXd f1 = d1.f.size() > 0 ? Eigen::MatrixXd(d1.f.leftCols(n))
                                         : Eigen::MatrixXd::Zero(N, n);
    Eigen::MatrixXd f2 = d2.f.size() > 0 ? Eigen::MatrixXd(d2.f.leftCols(n))
                                         : Eigen::MatrixXd::Zero(N, n);
    rep.data_ordered = rep.data_ordered && (f2 - f1).minCoeff() >= 0.0;
    rep.forcing_equal = (f2 - f1).cwiseAbs().maxCoeff() == 0.0;
  } else {
    rep.forcing_equal = true;
  }
  rep.ordered_slack = (r2.U - r1.U).minCoeff();

  // majorant: solve with |data differences|; it dominates |u1 - u2| node by
  // node, and with A = 0 its mass dominates in turn (diffusion only removes
  // mass), giving the discrete L1 contraction ladder
  ProblemData dd;
  dd.u0 = (d2.u0 - d1.u0).cwiseAbs();
  const int fcols = std::max(d1.f.size() > 0 ? n : 0, d2.f.size() > 0 ? n : 0);
  if (fcols > 0) {
    Eigen::MatrixXd f1 = d1.f.size() > 0 ? Eigen::MatrixXd(d1.f.leftCols(n))
                                         : Eigen::MatrixXd::Zero(N, n);
    Eigen::MatrixXd f2 = d2.f.size() > 0 ? Eigen::MatrixXd(d2.f.leftCols(n))
                                         : Eigen::MatrixXd::Zero(N, n);
    dd.f = (f2 - f1).cwiseAbs();
  }
  auto rm = solve(w, A, dd);

  rep.l1_slack = std::numeric_limits<double>::infinity();
  rep.contraction_slack = std::numeric_limits<double>::infinity();
  const double base = h * dd.u0.sum();
  for (int m = 1; m <= n; ++m) {
    const double diff_mass = h * (r2.U.col(m) - r1.U.col(m)).cwiseAbs().sum();
    const double major_mass = h * rm.U.col(m).sum();
    rep.l1_slack = std::min(rep.l1_slack, major_mass - diff_mass);
    if (rep.forcing_equal)
      rep.contraction_slack = std::min(rep.contraction_slack, base - diff_mass);
  }
  return rep;
}

// ------------------------------------------------------------------
// entropy suite: a grid of (level, profile, cutoff) tuples, each tested
// against several kernel splits

struct EntropyCase {
  double level = 1.0;   // saturation level of S
  int phi_index = 0;    // which spatial profile
  int zeta_power = 1;   // cutoff exponent
  double t_cut = 0.0;   // kernel split time
  double residual = 0.0;
  double scale = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct EntropySuiteReport {
  std::vector<EntropyCase> cases;
  bool all_pass = true;
  double worst_margin = -std::numeric_limits<double>::infinity();  // max residual/tol
};

struct EntropySuiteOptions {
  std::vector<double> levels{1.0, 5.0};
  std::vector<int> zeta_powers{1, 2};
  std::vector<double> cut_fractions{0.125, 0.25, 0.5};
  double delta_fraction = 0.25;  // smoothing width of S as a fraction of the level
  double tol_constant = 1.0;     // calibrated by callers and frozen there
  double tau_power = 0.5;        // tolerance decays like tau^power
  double tol_floor = 1e-8;
};

inline std::vector<Eigen::VectorXd> entropy_profiles(const SpaceGrid1D& grid) {
  const int N = grid.N;
  const double c = 0.5 * (grid.a + grid.b);
  const double half = 0.5 * (grid.b - grid.a);
  std::vector<Eigen::VectorXd> phis;
  phis.push_back(Eigen::VectorXd::Zero(N));
  Eigen::VectorXd bump(N), dome(N);
  for (int i = 0; i < N; ++i) {
    const double xh = (grid.node(i) - c) / half;  // normalised to (-1,1)
    bump[i] = 0.6 * std::max(0.0, 1.0 - 4.0 * std::fabs(xh));
    dome[i] = 0.8 * (1.0 - xh * xh);
  }
  phis.push_back(bump);
  phis.push_back(dome);
  return phis;
}

inline EntropySuiteReport run_entropy_suite(const KernelSpec& k, const TimeGrid& tgrid,
                                            const SpaceGrid1D& sgrid, const Eigen::MatrixXd& A,
                                            const Eigen::MatrixXd& U, const Eigen::MatrixXd& f,
                                            const EntropySuiteOptions& opt = {}) {
  EntropySuiteReport rep;
  const auto phis = entropy_profiles(sgrid);
  const double tau = tgrid.tau();
  const double tol_scale = opt.tol_constant * std::pow(tau, opt.tau_power);
  std::vector<double> nodes(tgrid.n);
  for (int j = 1; j <= tgrid.n; ++j) nodes[j - 1] = tgrid.node(j);

  for (double frac : opt.cut_fractions) {
    const KernelSplit split = split_kernel(k, frac * tgrid.T, nodes);
    for (double K : opt.levels) {
      const SmoothSign S{K, opt.delta_fraction * K};
      for (std::size_t p = 0; p < phis.size(); ++p) {
        for (int q : opt.zeta_powers) {
          const ZetaPoly zeta(tgrid.T, q);
          const EntropyResult r =
              entropy_residual(split, tgrid, sgrid.h(), A, U, f, phis[p], S, zeta);
          EntropyCase c;
          c.level = K;
          c.phi_index = static_cast<int>(p);
          c.zeta_power = q;
          c.t_cut = frac * tgrid.T;
          c.residual = r.residual();
          c.scale = r.scale();
          c.tol = tol_scale * c.scale + opt.tol_floor;
          c.pass = c.residual <= c.tol;
          rep.all_pass = rep.all_pass && c.pass;
          rep.worst_margin = std::max(rep.worst_margin, c.residual / c.tol);
          rep.cases.push_back(c);
        }
      }
    }
  }
  return rep;
}

// localized defect used by the tests and the verification tool to confirm
// that corrupted fields are rejected
inline void corrupt_trajectory(Eigen::MatrixXd& U, double fraction = 0.5) {
  const Eigen::Index i = U.rows() / 2;
  const Eigen::Index j = (3 * (U.cols() - 1)) / 4;
  U(i, j) += fraction * U.cwiseAbs().maxCoeff();
}

}  // namespace fnld
