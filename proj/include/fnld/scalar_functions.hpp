#pragma once

// Scalar test functions used by the entropy machinery: truncations, plateau
// cutoffs, and smooth regularisations of |.| and sign(.).

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fnld {

// T_K(r) = max(-K, min(r, K)).
inline double truncate(double r, double K) {
  if (!(K >= 0.0)) throw std::domain_error("truncate: level must be non-negative");
  return std::clamp(r, -K, K);
}

// Band truncation T_{K,M} = T_M - T_K for 0 <= K <= M: keeps the part of r
// between the levels K and M.
inline double truncate_band(double r, double K, double M) {
  if (!(0.0 <= K && K <= M)) throw std::domain_error("truncate_band: need 0 <= K <= M");
  return truncate(r, M) - truncate(r, K);
}

// Plateau cutoff: 1 on [-l, l], linear down to 0 at |u| = l + 1.
inline double plateau(double u, double l) {
  if (!(l >= 0.0)) throw std::domain_error("plateau: level must be non-negative");
  return std::clamp(l + 1.0 - std::abs(u), 0.0, 1.0);
}

// H_eps(y) = sqrt(y^2 + eps^2) - eps: smooth, convex, even, H_eps(0) = 0,
// decreasing in eps toward |y|.
struct SmoothAbs {
  double eps;

  explicit SmoothAbs(double eps_) : eps(eps_) {
    if (!(eps > 0.0)) throw std::domain_error("SmoothAbs: eps must be positive");
  }
  double value(double y) const { return std::hypot(y, eps) - eps; }
  double deriv(double y) const { return y / std::hypot(y, eps); }
  double second(double y) const {
    const double h = std::hypot(y, eps);
    return eps * eps / (h * h * h);
  }
};

// C^1 saturating truncation: odd, non-decreasing, bounded, with
//
//   S(r) = r                                   |r| <= K
//   S(r) = K + e - e^2/(2 delta),  e = |r|-K   K < |r| <= K + delta
//   S(r) = K + delta/2                         |r| >  K + delta
//
// (signs follow r). S' is the matching plateau-shoulder cutoff and the
// primitive int_0^y S is even, convex, piecewise cubic.
struct SmoothSign {
  double K;
  double delta;

  SmoothSign(double K_, double delta_) : K(K_), delta(delta_) {
    if (!(K >= 0.0)) throw std::domain_error("SmoothSign: level must be non-negative");
    if (!(delta > 0.0)) throw std::domain_error("SmoothSign: shoulder must be positive");
  }

  double value(double r) const {
    const double a = std::abs(r);
    double v;
    if (a <= K) {
      v = a;
    } else if (a <= K + delta) {
      const double e = a - K;
      v = K + e - 0.5 * e * e / delta;
    } else {
      v = K + 0.5 * delta;
    }
    return (r < 0.0) ? -v : v;
  }

  double deriv(double r) const {
    const double a = std::abs(r);
    if (a <= K) return 1.0;
    if (a >= K + delta) return 0.0;
    return (K + delta - a) / delta;
  }

  // int_0^y S(u) du, even and convex
  double antideriv(double y) const {
    const double a = std::abs(y);
    if (a <= K) return 0.5 * a * a;
    if (a <= K + delta) {
      const double e = a - K;
      return 0.5 * K * K + K * e + 0.5 * e * e - e * e * e / (6.0 * delta);
    }
    const double full = 0.5 * K * K + K * delta + delta * delta / 3.0;
    return full + (K + 0.5 * delta) * (a - K - delta);
  }
};

}  // namespace fnld
