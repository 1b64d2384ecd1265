#pragma once

// Shared special-function helpers for the kernel and Volterra modules.

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace fnld {

// 1/Gamma(x), exactly zero at the poles x = 0, -1, -2, ...
inline double reciprocal_gamma(double x) {
  if (x > 0.0) return 1.0 / std::tgamma(x);
  const double r = std::round(x);
  if (r <= 0.0 && std::abs(x - r) < 1e-12) return 0.0;
  return 1.0 / std::tgamma(x);
}

// Unnormalised lower incomplete gamma: int_0^x t^{s-1} e^{-t} dt.
inline double gamma_lower(double s, double x) {
  if (!(s > 0.0)) throw std::domain_error("gamma_lower: shape must be positive");
  if (x <= 0.0) return 0.0;
  return boost::math::tgamma_lower(s, x);
}

}  // namespace fnld
