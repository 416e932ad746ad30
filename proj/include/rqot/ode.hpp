#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "rqot/units.hpp"

namespace rqot::ode {

struct Settings {
  double initial_step = 100.0;  // independent-variable units (m for the Raman solver)
  double rtol = 1e-8;
  double atol = 1e-15;
  double min_step = 1e-6;
  std::size_t max_steps = 200000;
  bool clamp_negative = true;
  double max_value = std::numeric_limits<double>::infinity();  // blow-up guard on any component
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_calls = 0;
  std::size_t clamp_events = 0;
};

/// Row-major samples of the state at the requested output points.
struct Trajectory {
  std::size_t dim = 0;
  std::vector<double> grid;
  std::vector<double> values;  // grid.size() * dim
  Stats stats;

  double at(std::size_t k, std::size_t i) const { return values[k * dim + i]; }
  std::span<const double> row(std::size_t k) const { return {values.data() + k * dim, dim}; }
};

namespace dopri5 {
// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer & Wanner, DOPRI5 dense output).
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dopri5

/// Adaptive Dormand-Prince 5(4) integration of y' = f(x, y) from grid.front()
/// to grid.back(), sampling the dense output at every grid point.
///
/// `f(x, y, dydx)` writes the derivative into `dydx`. The grid must be
/// strictly increasing; grid.front() is the initial point.
template <class Rhs>
Trajectory integrate(Rhs&& f, std::span<const double> grid, std::vector<double> y, const Settings& s) {
  using namespace dopri5;
  if (grid.size() < 2) throw NumericalError("ode: output grid needs at least two points");
  if (!(s.rtol > 0.0) || !(s.atol > 0.0)) throw NumericalError("ode: tolerances must be > 0");

  const std::size_t n = y.size();
  Trajectory out;
  out.dim = n;
  out.grid.assign(grid.begin(), grid.end());
  out.values.resize(grid.size() * n);
  std::copy(y.begin(), y.end(), out.values.begin());

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  std::vector<double> r1(n), r2(n), r3(n), r4(n), r5(n);

  double x = grid.front();
  const double xend = grid.back();
  double h = std::min(s.initial_step, xend - x);
  std::size_t next_out = 1;
  double err_prev = 1e-4;

  f(x, std::as_const(y), k1);
  ++out.stats.rhs_calls;

  while (x < xend) {
    if (out.stats.accepted + out.stats.rejected >= s.max_steps) throw NumericalError("ode: maximum step count exceeded");
    if (h < s.min_step) {
      std::ostringstream os;
      os << "ode: step size underflow at x = " << x << " (h = " << h << ")";
      throw NumericalError(os.str());
    }
    if (x + h > xend) h = xend - x;

    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    f(x + c2 * h, std::as_const(tmp), k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(x + c3 * h, std::as_const(tmp), k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(x + c4 * h, std::as_const(tmp), k4);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(x + c5 * h, std::as_const(tmp), k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(x + h, std::as_const(tmp), k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(x + h, std::as_const(ynew), k7);
    out.stats.rhs_calls += 6;

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = s.atol + s.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (!std::isfinite(err)) {
      ++out.stats.rejected;
      h *= 0.2;
      continue;
    }

    if (err <= 1.0) {
      // Dense output on [x, x + h] for every pending grid point.
      const double xnew = x + h;
      bool dense_ready = false;
      while (next_out < grid.size() && grid[next_out] <= xnew * (1.0 + 1e-15)) {
        if (!dense_ready) {
          for (std::size_t i = 0; i < n; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            r1[i] = y[i];
            r2[i] = ydiff;
            r3[i] = bspl;
            r4[i] = ydiff - h * k7[i] - bspl;
            r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
          }
          dense_ready = true;
        }
        const double th = next_out + 1 == grid.size() ? 1.0 : (grid[next_out] - x) / h;
        const double th1 = 1.0 - th;
        double* row = out.values.data() + next_out * n;
        for (std::size_t i = 0; i < n; ++i) {
          double v = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
          if (next_out + 1 == grid.size()) v = ynew[i];
          if (s.clamp_negative && v < 0.0) v = 0.0;
          row[i] = v;
        }
        ++next_out;
      }

      bool clamped = false;
      if (s.clamp_negative) {
        for (std::size_t i = 0; i < n; ++i) {
          if (ynew[i] < 0.0) {
            const double limit = 10.0 * (s.atol + s.rtol * std::abs(y[i]));
            if (-ynew[i] > limit) {
              std::ostringstream os;
              os << "ode: negative excursion " << ynew[i] << " of component " << i << " at x = " << xnew;
              throw NumericalError(os.str());
            }
            ynew[i] = 0.0;
            clamped = true;
          }
        }
      }
      if (clamped) ++out.stats.clamp_events;
      for (std::size_t i = 0; i < n; ++i)
        if (!(ynew[i] <= s.max_value)) {
          std::ostringstream os;
          os << "ode: component " << i << " exceeded " << s.max_value << " at x = " << xnew;
          throw NumericalError(os.str());
        }

      x = xnew;
      y.swap(ynew);
      if (clamped)
        f(x, std::as_const(y), k1), ++out.stats.rhs_calls;
      else
        k1.swap(k7);
      ++out.stats.accepted;

      // PI step-size control.
      double fac = 0.9 * std::pow(err, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      if (err == 0.0) fac = 5.0;
      fac = std::clamp(fac, 0.2, 5.0);
      err_prev = std::max(err, 1e-4);
      h *= fac;
    } else {
      ++out.stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
  return out;
}

}  // namespace rqot::ode
