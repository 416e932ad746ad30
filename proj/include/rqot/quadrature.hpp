#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rqot/units.hpp"

namespace rqot::quad {

/// Composite Simpson over uniformly spaced samples (odd count >= 3).
template <class T>
T simpson(const std::vector<T>& y, double h) {
  const std::size_t n = y.size();
  if (n < 3 || n % 2 == 0) throw InputError("simpson: need an odd number of samples >= 3");
  T s = y.front() + y.back();
  for (std::size_t k = 1; k + 1 < n; ++k) s += (k % 2 ? 4.0 : 2.0) * y[k];
  return s * (h / 3.0);
}

/// Composite Simpson of f over [a, b] with n (odd) nodes.
template <class F>
auto simpson(F&& f, double a, double b, std::size_t n) {
  if (n < 3 || n % 2 == 0) throw InputError("simpson: need an odd number of nodes >= 3");
  const double h = (b - a) / static_cast<double>(n - 1);
  auto s = f(a) + f(b);
  for (std::size_t k = 1; k + 1 < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(k));
  return s * (h / 3.0);
}

/// Adaptive Gauss-Kronrod (7/15) over [a, b].
template <class F>
double adaptive(F&& f, double a, double b, double rel_tol, unsigned max_depth = 30, double* error = nullptr) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rel_tol, &err);
  if (error) *error = err;
  return v;
}

}  // namespace rqot::quad
