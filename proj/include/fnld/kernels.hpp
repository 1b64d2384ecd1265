#pragma once

// Memory kernels for the nonlocal-in-time diffusion solver.
//
// A kernel is a non-negative, non-increasing function on (0, T], possibly
// singular at the origin. The two parametric families come paired with a
// resolvent partner l satisfying the convolution identity (k * l)(t) = 1:
//
//   riemann_liouville(alpha):  k(t) = g_{1-alpha}(t)
//                              l(t) = g_alpha(t)
//   exp_weighted(alpha, mu):   k(t) = g_{1-alpha}(t) e^{-mu t}
//                              l(t) = g_alpha(t) e^{-mu t}
//                                     + mu^{1-alpha} P(alpha, mu t)
//
// where g_beta(t) = t^{beta-1} / Gamma(beta) and P is the normalised lower
// incomplete gamma function. Tabulated kernels are piecewise constant from
// the left, so a non-increasing sample table stays non-increasing exactly
// and cell integrals reduce to finite sums.
//
// All quadrature against kernels goes through exact antiderivatives; no
// kernel is ever numerically integrated across its singularity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "quadrature.hpp"
#include "special.hpp"

namespace fnld {

// g_beta(t) = t^{beta-1} / Gamma(beta).
inline double eval_g(double beta, double t) {
  if (!(beta > 0.0)) throw std::domain_error("eval_g: beta must be positive");
  if (!(t > 0.0)) throw std::domain_error("eval_g: t must be positive");
  return std::pow(t, beta - 1.0) / std::tgamma(beta);
}

enum class KernelFamily { power_law, exp_weighted, exp_weighted_partner, tabulated };

struct KernelSpec {
  KernelFamily family = KernelFamily::power_law;
  double beta = 0.5;  // exponent of the leading g_beta factor
  double mu = 0.0;    // exponential tilt
  std::vector<double> times;   // tabulated: sample points, strictly increasing, > 0
  std::vector<double> values;  // tabulated: non-negative, non-increasing
  std::vector<double> prefix;  // tabulated: prefix[i] = int_0^{times[i]} k

  // k(t) = g_{1-alpha}(t), the kernel whose associated memory operator is
  // the classical fractional derivative of order alpha in (0,1).
  static KernelSpec riemann_liouville(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::domain_error("riemann_liouville: alpha must lie in (0,1)");
    KernelSpec s;
    s.family = KernelFamily::power_law;
    s.beta = 1.0 - alpha;
    return s;
  }

  // k(t) = g_beta(t). beta = 1 gives the constant kernel k == 1.
  static KernelSpec power_law(double beta) {
    if (!(beta > 0.0 && beta <= 1.0))
      throw std::domain_error("power_law: beta must lie in (0,1]");
    KernelSpec s;
    s.family = KernelFamily::power_law;
    s.beta = beta;
    return s;
  }

  // k(t) = g_{1-alpha}(t) e^{-mu t}.
  static KernelSpec exp_weighted(double alpha, double mu) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::domain_error("exp_weighted: alpha must lie in (0,1)");
    if (!(mu >= 0.0)) throw std::domain_error("exp_weighted: mu must be non-negative");
    KernelSpec s;
    s.family = KernelFamily::exp_weighted;
    s.beta = 1.0 - alpha;
    s.mu = mu;
    return s;
  }

  // The resolvent partner of exp_weighted(alpha, mu); exposed for tests.
  static KernelSpec exp_weighted_partner(double alpha, double mu) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::domain_error("exp_weighted_partner: alpha must lie in (0,1)");
    if (!(mu >= 0.0))
      throw std::domain_error("exp_weighted_partner: mu must be non-negative");
    KernelSpec s;
    s.family = KernelFamily::exp_weighted_partner;
    s.beta = alpha;
    s.mu = mu;
    return s;
  }

  static KernelSpec tabulated(std::vector<double> t, std::vector<double> v) {
    if (t.size() != v.size()) throw std::invalid_argument("tabulated: size mismatch");
    if (t.empty()) throw std::invalid_argument("tabulated: empty table");
    if (!(t.front() > 0.0)) throw std::domain_error("tabulated: times must be positive");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1]))
        throw std::domain_error("tabulated: times must be strictly increasing");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] >= 0.0)) throw std::domain_error("tabulated: values must be non-negative");
      if (i > 0 && v[i] > v[i - 1])
        throw std::domain_error("tabulated: values must be non-increasing");
    }
    KernelSpec s;
    s.family = KernelFamily::tabulated;
    s.times = std::move(t);
    s.values = std::move(v);
    s.prefix.resize(s.times.size());
    // k == values[0] on (0, times[0]], then piecewise constant from the left.
    s.prefix[0] = s.values[0] * s.times[0];
    for (std::size_t i = 1; i < s.times.size(); ++i)
      s.prefix[i] = s.prefix[i - 1] + s.values[i] * (s.times[i] - s.times[i - 1]);
    return s;
  }

  bool singular_at_origin() const {
    switch (family) {
      case KernelFamily::tabulated: return false;
      default: return beta < 1.0;
    }
  }

  // k(0+); +inf when the kernel is singular there.
  double value_at_origin() const {
    if (singular_at_origin()) return std::numeric_limits<double>::infinity();
    if (family == KernelFamily::tabulated) return values.front();
    return 1.0 / std::tgamma(beta);  // g_1 == 1, weighted families at beta == 1
  }

  double operator()(double t) const {
    if (!(t > 0.0)) throw std::domain_error("KernelSpec: evaluation needs t > 0");
    switch (family) {
      case KernelFamily::power_law:
        return eval_g(beta, t);
      case KernelFamily::exp_weighted:
        return eval_g(beta, t) * std::exp(-mu * t);
      case KernelFamily::exp_weighted_partner: {
        const double head = eval_g(beta, t) * std::exp(-mu * t);
        if (mu == 0.0) return head;
        return head + std::pow(mu, 1.0 - beta) * gamma_lower(beta, mu * t) / std::tgamma(beta);
      }
      case KernelFamily::tabulated: {
        if (t >= times.back()) return values.back();
        // first sample point >= t indexes the piece containing t
        const auto it = std::lower_bound(times.begin(), times.end(), t);
        return values[static_cast<std::size_t>(it - times.begin())];
      }
    }
    throw std::logic_error("KernelSpec: bad family");
  }

  // G(t) = int_0^t k, exact in closed form for every family.
  double antiderivative(double t) const {
    if (t == 0.0) return 0.0;
    if (!(t > 0.0)) throw std::domain_error("KernelSpec: antiderivative needs t >= 0");
    switch (family) {
      case KernelFamily::power_law:
        return std::pow(t, beta) / std::tgamma(beta + 1.0);
      case KernelFamily::exp_weighted: {
        if (mu == 0.0) return std::pow(t, beta) / std::tgamma(beta + 1.0);
        return std::pow(mu, -beta) * gamma_lower(beta, mu * t) / std::tgamma(beta);
      }
      case KernelFamily::exp_weighted_partner: {
        if (mu == 0.0) return std::pow(t, beta) / std::tgamma(beta + 1.0);
        const double x = mu * t;
        const double glo = gamma_lower(beta, x);
        return std::pow(mu, -beta) * ((1.0 + x) * glo - gamma_lower(beta + 1.0, x)) /
               std::tgamma(beta);
      }
      case KernelFamily::tabulated: {
        if (t <= times.front()) return values.front() * t;
        if (t >= times.back())
          return prefix.back() + values.back() * (t - times.back());
        const auto it = std::lower_bound(times.begin(), times.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - times.begin());
        return prefix[i - 1] + values[i] * (t - times[i - 1]);
      }
    }
    throw std::logic_error("KernelSpec: bad family");
  }

  // k'(t) where the kernel is differentiable; tabulated kernels return 0,
  // their derivative vanishing away from the sample points.
  double derivative(double t) const {
    if (!(t > 0.0)) throw std::domain_error("KernelSpec: derivative needs t > 0");
    switch (family) {
      case KernelFamily::power_law:
        return (beta - 1.0) * std::pow(t, beta - 2.0) / std::tgamma(beta);
      case KernelFamily::exp_weighted:
        return std::exp(-mu * t) *
               ((beta - 1.0) * std::pow(t, beta - 2.0) - mu * std::pow(t, beta - 1.0)) /
               std::tgamma(beta);
      case KernelFamily::exp_weighted_partner:
        // the incomplete-gamma tail cancels the tilt term exactly
        return (beta - 1.0) * std::pow(t, beta - 2.0) * std::exp(-mu * t) / std::tgamma(beta);
      case KernelFamily::tabulated:
        return 0.0;
    }
    throw std::logic_error("KernelSpec: bad family");
  }
};

// A kernel together with its resolvent partner, (k * l) == 1 on (0, inf).
// lp_exponent is an exponent p > 1 with l in L^p(0, T), used for reporting.
struct KernelPair {
  KernelSpec k;
  KernelSpec l;
  double lp_exponent = 1.0;
};

inline KernelPair make_pair(const KernelSpec& k) {
  KernelPair pair;
  pair.k = k;
  switch (k.family) {
    case KernelFamily::power_law:
      if (k.beta >= 1.0)
        throw std::domain_error("make_pair: constant kernel has no integrable partner");
      pair.l = KernelSpec::power_law(1.0 - k.beta);
      break;
    case KernelFamily::exp_weighted:
      pair.l = KernelSpec::exp_weighted_partner(1.0 - k.beta, k.mu);
      break;
    default:
      throw std::domain_error("make_pair: only the parametric families carry a partner");
  }
  // l ~ t^{-beta} near 0, so l in L^p exactly for p < 1/beta; take the midpoint.
  pair.lp_exponent = 0.5 * (1.0 + 1.0 / k.beta);
  return pair;
}

// a[j] = int over cell j of k, computed as differences of the exact
// antiderivative. For a non-increasing kernel a is non-increasing.
struct CellIntegrals {
  double tau = 0.0;
  std::vector<double> a;
};

inline CellIntegrals cell_integrals(const KernelSpec& k, double tau, int n) {
  if (!(tau > 0.0)) throw std::domain_error("cell_integrals: tau must be positive");
  if (n < 1) throw std::domain_error("cell_integrals: need at least one cell");
  CellIntegrals c;
  c.tau = tau;
  c.a.resize(n);
  double prev = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double cur = k.antiderivative(j * tau);
    c.a[j - 1] = cur - prev;
    prev = cur;
  }
  return c;
}

// Values of (k1 * k2)(t_i) at the nodes t_i = i T / n. Entry 0 is the empty
// integral 0; entries 1..n are the convolution values. Nodes in the band
// t <= T/8 are integrated by double-exponential quadrature; past the band a
// symmetric product rule integrates each factor exactly near its own
// singular end and samples the other at cell midpoints, which keeps the
// sampled factor a distance >= t_i/2 - tau/2 from its singularity.
inline std::vector<double> convolve(const KernelSpec& k1, const KernelSpec& k2, double T,
                                    int n) {
  if (!(T > 0.0)) throw std::domain_error("convolve: horizon must be positive");
  if (n < 1) throw std::domain_error("convolve: need at least one node");
  const double tau = T / n;
  const CellIntegrals K = cell_integrals(k1, tau, n);
  const CellIntegrals L = cell_integrals(k2, tau, n);
  const int near_band = std::max(1, n / 8);

  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 1; i <= n; ++i) {
    const double t = i * tau;
    if (i <= near_band) {
      // split at t/2 so each piece is singular only at its left endpoint
      const double half = 0.5 * t;
      out[i] = integrate_finite([&](double s) { return k1(t - s) * k2(s); }, 0.0, half, 1e-10) +
               integrate_finite([&](double z) { return k1(z) * k2(t - z); }, 0.0, half, 1e-10);
      continue;
    }
    const int m = i / 2;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += L.a[j] * k1(t - (j + 0.5) * tau);
    for (int j = 0; j < i - m; ++j) acc += K.a[j] * k2(t - (j + 0.5) * tau);
    out[i] = acc;
  }
  return out;
}

// max_i |(k * l)(t_i) - 1| over the nodes i = 1..n.
inline double sonine_residual(const KernelPair& pair, double T, int n) {
  const std::vector<double> conv = convolve(pair.k, pair.l, T, n);
  double r = 0.0;
  for (int i = 1; i <= n; ++i) r = std::max(r, std::abs(conv[i] - 1.0));
  return r;
}

// Decompose k = k1 + k2 at a cut time: k2 = min(k, k(t_cut)) is bounded with
// k2(0+) = k(t_cut), and k1 = k - k2 is supported on (0, t_cut]. Both parts
// are non-negative and non-increasing. The tabulated views sample the parts
// on a caller-supplied grid; cell integrals of the parts stay exact through
// the parent antiderivative, so cells1 + cells2 reproduces the parent cells
// to rounding.
struct KernelSplit {
  KernelSpec parent;
  double t_cut = 0.0;
  double cut_value = 0.0;  // k(t_cut) = k2(0+)
  double G_cut = 0.0;      // parent antiderivative at t_cut
  KernelSpec k1;
  KernelSpec k2;

  double antiderivative2(double t) const {
    if (t == 0.0) return 0.0;
    if (t <= t_cut) return cut_value * t;
    return cut_value * t_cut + parent.antiderivative(t) - G_cut;
  }
  double antiderivative1(double t) const { return parent.antiderivative(t) - antiderivative2(t); }

  CellIntegrals cells1(double tau, int n) const {
    CellIntegrals c = cells_from(tau, n, [this](double t) { return antiderivative1(t); });
    return c;
  }
  CellIntegrals cells2(double tau, int n) const {
    CellIntegrals c = cells_from(tau, n, [this](double t) { return antiderivative2(t); });
    return c;
  }

 private:
  template <class G>
  CellIntegrals cells_from(double tau, int n, G&& g) const {
    if (!(tau > 0.0)) throw std::domain_error("KernelSplit: tau must be positive");
    if (n < 1) throw std::domain_error("KernelSplit: need at least one cell");
    CellIntegrals c;
    c.tau = tau;
    c.a.resize(n);
    double prev = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double cur = g(j * tau);
      c.a[j - 1] = cur - prev;
      prev = cur;
    }
    return c;
  }
};

inline KernelSplit split_kernel(const KernelSpec& k, double t_cut,
                                std::span<const double> sample_times) {
  if (!(t_cut > 0.0)) throw std::domain_error("split_kernel: cut time must be positive");
  if (sample_times.empty()) throw std::invalid_argument("split_kernel: no sample times");
  KernelSplit sp;
  sp.parent = k;
  sp.t_cut = t_cut;
  sp.cut_value = k(t_cut);
  sp.G_cut = k.antiderivative(t_cut);
  std::vector<double> ts(sample_times.begin(), sample_times.end());
  std::vector<double> v1(ts.size()), v2(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double kv = k(ts[i]);
    v2[i] = std::min(kv, sp.cut_value);
    v1[i] = kv - v2[i];
  }
  sp.k1 = KernelSpec::tabulated(ts, std::move(v1));
  sp.k2 = KernelSpec::tabulated(std::move(ts), std::move(v2));
  return sp;
}

}  // namespace fnld
