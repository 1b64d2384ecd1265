#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include <fnld/volterra.hpp>

#include "oracles.hpp"

using fnld::KernelSpec;
using fnld::TimeGrid;

namespace {

// E_{1/2}(-x) = e^{x^2} erfc(x), through the independent erfc oracle
double ml_half_oracle(double x) {
  if (x < 25.0) return std::exp(x * x) * oracle::erfc_fn(x);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 8; ++k) {
    term *= -(2.0 * k - 1.0) / (2.0 * x * x);
    sum += term;
  }
  return sum / (x * std::sqrt(std::numbers::pi));
}

double exact_s_half(double t, double lambda) { return ml_half_oracle(std::sqrt(t) / lambda); }

}  // namespace

TEST_CASE("mittag-leffler against the erfc closed form") {
  for (double x : {0.05, 0.25, 1.0, 3.9, 4.1, 10.0, 50.0, 300.0, 2000.0}) {
    CHECK(fnld::mittag_leffler(0.5, -x) == Catch::Approx(ml_half_oracle(x)).epsilon(1e-7));
  }
  CHECK(fnld::mittag_leffler(1.0, -2.5) == Catch::Approx(std::exp(-2.5)).epsilon(1e-14));
  CHECK(fnld::mittag_leffler(0.3, 0.0) == 1.0);
  // complete monotonicity in the argument (sampled)
  for (double a : {0.2, 0.5, 0.8}) {
    double prev = 1.0;
    for (double x : {0.1, 0.5, 2.0, 8.0, 40.0, 200.0}) {
      const double v = fnld::mittag_leffler(a, -x);
      CHECK(v > 0.0);
      CHECK(v < prev);
      prev = v;
    }
  }
  CHECK_THROWS_AS(fnld::mittag_leffler(0.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(fnld::mittag_leffler(1.2, -1.0), std::domain_error);
  CHECK_THROWS_AS(fnld::mittag_leffler(0.5, 0.5), std::domain_error);
}

TEST_CASE("relaxation family matches the exact solution at alpha = 1/2") {
  const TimeGrid grid(1.0, 512);
  const fnld::KernelPair pair = fnld::make_pair(KernelSpec::riemann_liouville(0.5));
  for (double lambda : {1.0, 0.1}) {
    const fnld::YosidaFamily fam = fnld::solve_s_lambda(pair, grid, lambda);
    REQUIRE(static_cast<int>(fam.s.size()) == grid.n + 1);
    CHECK(fam.s[0] == 1.0);
    double sup = 0.0;
    for (int i = 1; i <= grid.n; ++i)
      sup = std::max(sup, std::abs(fam.s[i] - exact_s_half(grid.node(i), lambda)));
    CHECK(sup < (lambda == 1.0 ? 2.5e-4 : 1.2e-3));
    // structure: values in [0,1], non-increasing, increments non-negative
    for (int i = 0; i <= grid.n; ++i) {
      CHECK(fam.s[i] >= 0.0);
      CHECK(fam.s[i] <= 1.0);
    }
    for (int i = 0; i < grid.n; ++i) CHECK(fam.r_increments[i] >= 0.0);
    double rsum = 0.0;
    for (double r : fam.r_increments) rsum += r;
    CHECK(rsum == Catch::Approx(1.0 - fam.s[grid.n]).margin(1e-13));
    for (int i = 0; i <= grid.n; ++i)
      CHECK(fam.k_lambda[i] == Catch::Approx(fam.s[i] / lambda));
  }
  CHECK_THROWS_AS(fnld::solve_s_lambda(pair, grid, 0.0), std::domain_error);
  CHECK_THROWS_AS(fnld::solve_s_lambda(pair, grid, -1.0), std::domain_error);
}

TEST_CASE("substituted residual of the marched solution is at rounding level") {
  // re-evaluate s + (1/lambda)(l * s) - 1 on the internal mesh with an
  // independent summation order
  const TimeGrid grid(0.8, 96);
  for (const fnld::KernelPair& pair :
       {fnld::make_pair(KernelSpec::riemann_liouville(0.35)),
        fnld::make_pair(KernelSpec::exp_weighted(0.6, 1.7))}) {
    const double lambda = 0.4;
    const fnld::YosidaFamily fam = fnld::solve_s_lambda(pair, grid, lambda);
    const auto& tm = fam.internal_times;
    const auto& sv = fam.internal_s;
    const int M = static_cast<int>(tm.size());
    double worst = 0.0;
    for (int i = M - 1; i >= 0; i -= 7) {
      const double ti = tm[i];
      double conv = 0.0;
      for (int j = i; j >= 0; --j) {  // reversed order vs the march
        const double lo = (j == 0) ? 0.0 : tm[j - 1];
        const double w = pair.l.antiderivative(ti - lo) -
                         ((j == i) ? 0.0 : pair.l.antiderivative(ti - tm[j]));
        conv += w * sv[j];
      }
      worst = std::max(worst, std::abs(fam.internal_s[i] + conv / lambda - 1.0));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("backward regularisation: exactness, contraction, positivity") {
  const TimeGrid grid(2.0, 64);
  const fnld::KernelPair pair = fnld::make_pair(KernelSpec::riemann_liouville(0.5));
  const fnld::YosidaFamily fam = fnld::solve_s_lambda(pair, grid, 0.05);

  // constant series: v_mu(t) = c (1 - s(T - t)) exactly by telescoping
  std::vector<double> v(grid.n + 1, 3.25);
  const std::vector<double> out = fnld::time_regularize(fam, v);
  for (int i = 0; i <= grid.n; ++i) {
    const double expected = 3.25 * (1.0 - fam.s[grid.n - i]);
    CHECK(out[i] == Catch::Approx(expected).margin(1e-13));
  }

  // random fields: sup contraction and positivity preservation
  for (std::uint32_t seed : {11u, 12u, 13u}) {
    std::vector<double> w = oracle::random_vector(seed, grid.n + 1, 0.0, 5.0);
    const std::vector<double> wm = fnld::time_regularize(fam, w);
    double win = 0.0, wout = 0.0;
    for (int i = 0; i <= grid.n; ++i) {
      win = std::max(win, std::abs(w[i]));
      wout = std::max(wout, std::abs(wm[i]));
      CHECK(wm[i] >= 0.0);
    }
    CHECK(wout <= win * (1.0 + 1e-12));
  }
  CHECK(fnld::time_regularize(fam, v).back() == 0.0);  // empty tail integral

  std::vector<double> bad(grid.n, 1.0);
  CHECK_THROWS_AS(fnld::time_regularize(fam, bad), std::invalid_argument);
}

TEST_CASE("bounded-kernel report: domination and L1 convergence") {
  const TimeGrid grid(1.0, 256);
  const KernelSpec k = KernelSpec::riemann_liouville(0.5);
  const fnld::KernelPair pair = fnld::make_pair(k);
  double prev_l1 = std::numeric_limits<double>::infinity();
  for (double lambda : {1.0, 0.1, 0.01}) {
    const fnld::YosidaFamily fam = fnld::solve_s_lambda(pair, grid, lambda);
    const fnld::K1Report rep = fnld::check_K1(fam, k);
    CHECK(rep.nonnegative);
    CHECK(rep.l1_distance < prev_l1);
    prev_l1 = rep.l1_distance;
    if (lambda >= 0.1) {
      CHECK(rep.dominated);
      CHECK(rep.max_excess < 0.0);
    }
  }
}

TEST_CASE("decay report: monotone slopes and derivative convergence") {
  const TimeGrid grid(1.0, 256);
  const KernelSpec k = KernelSpec::riemann_liouville(0.4);
  const fnld::KernelPair pair = fnld::make_pair(k);
  const int probe = 128;
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double lambda : {1.0, 0.2, 0.04}) {
    const fnld::YosidaFamily fam = fnld::solve_s_lambda(pair, grid, lambda);
    const fnld::K2Report rep = fnld::check_K2(fam, k);
    CHECK(rep.derivative_nonpositive);
    CHECK(rep.bounded);
    CHECK(rep.C1 >= 0.0);
    CHECK(rep.C2 >= 0.0);
    const double gap = std::abs(rep.neg_slope[probe] - (-k.derivative(grid.node(probe))));
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK_THROWS_AS(fnld::check_K2(fnld::solve_s_lambda(pair, TimeGrid(1.0, 2), 1.0), k),
                  std::invalid_argument);
}
