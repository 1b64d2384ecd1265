#pragma once

// Double-exponential quadrature wrappers. These back the convolution values
// near the origin and the Mittag-Leffler integral representation; the solver
// grids themselves always integrate kernels through exact antiderivatives.

#include <utility>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace fnld {

// Integrate f over (a, b); integrable endpoint singularities are fine.
template <class F>
double integrate_finite(F&& f, double a, double b, double tol = 1e-12) {
  boost::math::quadrature::tanh_sinh<double> rule;
  return rule.integrate(std::forward<F>(f), a, b, tol);
}

// Integrate f over (0, inf); f must decay at infinity.
template <class F>
double integrate_halfline(F&& f, double tol = 1e-12) {
  boost::math::quadrature::exp_sinh<double> rule;
  return rule.integrate(std::forward<F>(f), tol);
}

}  // namespace fnld
