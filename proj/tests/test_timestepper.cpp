#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fnld/fraclap.hpp"
#include "fnld/timestepper.hpp"
#include "fnld/volterra.hpp"
#include "oracles.hpp"

using fnld::KernelSpec;
using fnld::ProblemData;
using fnld::SchemeWeights;
using fnld::TimeGrid;

namespace {

Eigen::MatrixXd scalar_matrix(double omega) {
  Eigen::MatrixXd A(1, 1);
  A(0, 0) = omega;
  return A;
}

}  // namespace

TEST_CASE("weights are the exact kernel cell integrals") {
  const double alpha = 0.5;
  auto k = KernelSpec::riemann_liouville(alpha);
  TimeGrid tg{2.0, 16};
  SchemeWeights w(k, tg);
  REQUIRE(w.steps() == 16);
  const double tau = tg.tau();
  for (int j = 0; j < 16; ++j) {
    const double expected = (std::pow((j + 1) * tau, 1.0 - alpha) - std::pow(j * tau, 1.0 - alpha)) /
                            std::tgamma(2.0 - alpha);
    CHECK(w.a[j] == Catch::Approx(expected).epsilon(1e-14));
    if (j > 0) {
      CHECK(w.d[j] >= 0.0);
      CHECK(w.d[j] == Catch::Approx(w.a[j - 1] - w.a[j]).margin(1e-18));
    }
  }
}

TEST_CASE("construction and solve validation") {
  const std::vector<double> good{1.0, 0.5, 0.3};
  CHECK_THROWS_AS(SchemeWeights(0.0, good), std::domain_error);
  CHECK_THROWS_AS(SchemeWeights(0.1, std::vector<double>{}), std::domain_error);
  CHECK_THROWS_AS(SchemeWeights(0.1, std::vector<double>{-1.0, 0.5}), std::domain_error);
  const std::vector<double> increasing{1.0, 1.2};
  CHECK_THROWS_AS(SchemeWeights(0.1, increasing), std::invalid_argument);

  SchemeWeights w(0.1, good);
  Eigen::MatrixXd A = scalar_matrix(1.0);
  ProblemData pd;
  pd.u0 = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(fnld::solve(w, A, pd), std::invalid_argument);  // size mismatch
  pd.u0 = -Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(fnld::solve(w, A, pd), std::invalid_argument);  // signed data
  pd.allow_signed = true;
  CHECK_NOTHROW(fnld::solve(w, A, pd));
  pd.allow_signed = false;
  pd.u0 = Eigen::VectorXd::Ones(1);
  pd.f = -Eigen::MatrixXd::Ones(1, 3);
  CHECK_THROWS_AS(fnld::solve(w, A, pd), std::invalid_argument);  // signed forcing
  pd.f = Eigen::MatrixXd::Ones(1, 2);
  CHECK_THROWS_AS(fnld::solve(w, A, pd), std::invalid_argument);  // too few columns

  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(1, 1);
  CHECK_THROWS_AS(fnld::memory_apply(w, V), std::invalid_argument);
  V = Eigen::MatrixXd::Zero(1, 6);
  CHECK_THROWS_AS(fnld::memory_apply(w, V), std::invalid_argument);
}

TEST_CASE("first two steps expand to the closed-form update") {
  auto k = KernelSpec::riemann_liouville(0.4);
  TimeGrid tg{1.0, 2};
  SchemeWeights w(k, tg);
  const double tau = tg.tau();
  const double omega = 1.7;
  ProblemData pd;
  pd.u0 = Eigen::VectorXd::Constant(1, 0.9);
  pd.f = Eigen::MatrixXd::Zero(1, 2);
  pd.f(0, 0) = 0.3;
  pd.f(0, 1) = 0.1;
  auto r = fnld::solve(w, scalar_matrix(omega), pd);

  const double u1 = (pd.f(0, 0) + w.a[0] / tau * 0.9) / (w.a[0] / tau + omega);
  CHECK(r.U(0, 1) == Catch::Approx(u1).epsilon(1e-14));
  const double u2 =
      (pd.f(0, 1) + w.a[0] / tau * 0.9 + w.d[1] / tau * (u1 - 0.9)) / (w.a[0] / tau + omega);
  CHECK(r.U(0, 2) == Catch::Approx(u2).epsilon(1e-14));
}

TEST_CASE("memory operator equals the difference of exact interpolant convolutions") {
  auto k = KernelSpec::exp_weighted(0.6, 1.3);
  TimeGrid tg{1.5, 24};
  SchemeWeights w(k, tg);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd V(3, 25);
  for (int j = 0; j < 25; ++j)
    for (int i = 0; i < 3; ++i) V(i, j) = dist(rng);

  auto D = fnld::memory_apply(w, V);
  REQUIRE(D.cols() == 24);
  // independent path: convolution values of the piecewise-constant
  // interpolant, G_n = sum_j V^j a_{n-j}, then a backward difference; the
  // scheme is exact on such interpolants by construction
  for (int i = 0; i < 3; ++i) {
    for (int m = 1; m <= 24; ++m) {
      double conv = 0.0;
      for (int j = 1; j <= m; ++j) conv += V(i, j) * w.a[m - j];
      double prev_conv = V(i, 0) * (k.antiderivative(tg.node(m)) - k.antiderivative(tg.node(m - 1)));
      for (int j = 1; j < m; ++j) prev_conv += V(i, j) * w.a[m - 1 - j];
      CHECK(D(i, m - 1) == Catch::Approx((conv - prev_conv) / tg.tau()).margin(1e-11));
    }
  }
}

TEST_CASE("solver satisfies its own scheme") {
  auto k = KernelSpec::riemann_liouville(0.5);
  TimeGrid tg{1.0, 32};
  SchemeWeights w(k, tg);
  fnld::SpaceGrid1D sg{0.0, 1.0, 12};
  auto op = fnld::assemble_fraclap(0.55, sg);

  ProblemData pd;
  pd.u0.resize(12);
  pd.f.resize(12, 32);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> dist(0.0, 2.0);
  for (int i = 0; i < 12; ++i) pd.u0[i] = dist(rng);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 12; ++i) pd.f(i, j) = dist(rng);

  auto r = fnld::solve(w, op.A, pd);
  for (double res : r.step_residual) CHECK(res < 1e-10);

  Eigen::MatrixXd V = r.U;
  for (int j = 0; j < V.cols(); ++j) V.col(j) -= pd.u0;
  auto D = fnld::memory_apply(w, V);
  for (int m = 1; m <= 32; ++m) {
    Eigen::VectorXd residual = D.col(m - 1) + op.A * r.U.col(m) - pd.f.col(m - 1);
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("non-negative data give non-negative solutions, monotonically in the data") {
  auto k = KernelSpec::riemann_liouville(0.3);
  TimeGrid tg{2.0, 40};
  SchemeWeights w(k, tg);
  fnld::SpaceGrid1D sg{-1.0, 1.0, 16};
  auto op = fnld::assemble_fraclap(0.4, sg);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  ProblemData lo;
  lo.u0.resize(16);
  lo.f.resize(16, 40);
  for (int i = 0; i < 16; ++i) lo.u0[i] = dist(rng);
  for (int j = 0; j < 40; ++j)
    for (int i = 0; i < 16; ++i) lo.f(i, j) = dist(rng);

  ProblemData hi = lo;
  for (int i = 0; i < 16; ++i) hi.u0[i] += 0.3 * dist(rng);
  for (int j = 0; j < 40; ++j)
    for (int i = 0; i < 16; ++i) hi.f(i, j) += 0.2 * dist(rng);

  auto rlo = fnld::solve(w, op.A, lo);
  auto rhi = fnld::solve(w, op.A, hi);
  const double scale = rhi.U.cwiseAbs().maxCoeff();
  CHECK(rlo.U.minCoeff() >= -1e-13 * scale);
  CHECK((rhi.U - rlo.U).minCoeff() >= -1e-12 * scale);

  // without forcing the total mass never exceeds the initial mass
  ProblemData nf;
  nf.u0 = lo.u0;
  auto rnf = fnld::solve(w, op.A, nf);
  const double m0 = rnf.U.col(0).sum();
  double prev = m0;
  for (int m = 1; m <= 40; ++m) {
    const double mass = rnf.U.col(m).sum();
    CHECK(mass <= m0 * (1.0 + 1e-12));
    CHECK(mass <= prev * (1.0 + 1e-12));
    prev = mass;
  }
}

TEST_CASE("truncated-data ladder increases to the untruncated solution") {
  auto k = KernelSpec::exp_weighted(0.5, 0.8);
  TimeGrid tg{1.0, 24};
  SchemeWeights w(k, tg);
  fnld::SpaceGrid1D sg{0.0, 2.0, 12};
  auto op = fnld::assemble_fraclap(0.6, sg);

  ProblemData pd;
  pd.u0.resize(12);
  pd.f.resize(12, 24);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> dist(0.0, 3.0);
  for (int i = 0; i < 12; ++i) pd.u0[i] = dist(rng);
  for (int j = 0; j < 24; ++j)
    for (int i = 0; i < 12; ++i) pd.f(i, j) = dist(rng);

  const std::vector<double> levels{0.5, 1.0, 2.0, 10.0};
  auto ladder = fnld::approx_driver(w, op.A, pd, levels);
  REQUIRE(ladder.runs.size() == 5);

  const double scale = ladder.runs.back().U.cwiseAbs().maxCoeff();
  for (std::size_t m = 0; m + 1 < ladder.runs.size(); ++m) {
    const Eigen::MatrixXd gap = ladder.runs[m + 1].U - ladder.runs[m].U;
    CHECK(gap.minCoeff() >= -1e-12 * scale);
    CHECK(ladder.runs[m].U.minCoeff() >= -1e-13 * scale);
  }
  // the top level clears every datum, so that run IS the untruncated one
  CHECK((ladder.runs[3].U - ladder.runs[4].U).cwiseAbs().maxCoeff() == 0.0);

  const std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS_AS(fnld::approx_driver(w, op.A, pd, bad), std::invalid_argument);
}

TEST_CASE("scalar problems track the exact relaxation profile") {
  // d/dt(k*(u-1)) + 2u = 0 has the closed-form solution in terms of the
  // one-parameter relaxation function evaluated at -2 t^alpha
  const double T = 1.0;
  for (double alpha : {0.3, 0.5, 0.7}) {
    auto k = KernelSpec::riemann_liouville(alpha);
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {64, 128, 256}) {
      TimeGrid tg{T, n};
      SchemeWeights w(k, tg);
      ProblemData pd;
      pd.u0 = Eigen::VectorXd::Ones(1);
      auto r = fnld::solve(w, scalar_matrix(2.0), pd);
      double sup = 0.0;
      for (int m = n / 4; m <= n; ++m) {
        const double exact = fnld::mittag_leffler(alpha, -2.0 * std::pow(tg.node(m), alpha));
        sup = std::max(sup, std::fabs(r.U(0, m) - exact));
      }
      CHECK(sup < prev);
      prev = sup;
    }
    CHECK(prev < 3e-3);  // measured at n=256: 5.9e-4 / 1.1e-3 / 1.8e-3
  }
}

TEST_CASE("full problem tracks the spectral reference solution") {
  const double alpha = 0.5, s = 0.6;
  auto k = KernelSpec::riemann_liouville(alpha);
  fnld::SpaceGrid1D sg{-1.0, 1.0, 24};
  auto op = fnld::assemble_fraclap(s, sg);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op.A);
  REQUIRE(eig.info() == Eigen::Success);

  Eigen::VectorXd u0(24);
  for (int i = 0; i < 24; ++i) u0[i] = std::max(0.0, 1.0 - 2.0 * std::fabs(sg.node(i)));
  const Eigen::VectorXd coeff = eig.eigenvectors().transpose() * u0;

  double prev = std::numeric_limits<double>::infinity();
  for (int n : {32, 64, 128}) {
    TimeGrid tg{0.5, n};
    SchemeWeights w(k, tg);
    ProblemData pd;
    pd.u0 = u0;
    auto r = fnld::solve(w, op.A, pd);
    double sup = 0.0;
    for (int m : {n / 4, n / 2, n}) {
      const double t = tg.node(m);
      Eigen::VectorXd modes(24);
      for (int j = 0; j < 24; ++j)
        modes[j] = coeff[j] * fnld::mittag_leffler(alpha, -eig.eigenvalues()[j] * std::pow(t, alpha));
      const Eigen::VectorXd exact = eig.eigenvectors() * modes;
      sup = std::max(sup, (r.U.col(m) - exact).cwiseAbs().maxCoeff());
    }
    CHECK(sup < 0.6 * prev);
    prev = sup;
  }
  CHECK(prev < 3e-3);  // measured at n=128: 1.6e-3
}
