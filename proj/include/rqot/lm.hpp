#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace rqot::lm {

struct Options {
  std::size_t max_iterations = 200;
  double step_tolerance = 1e-10;       // on the parameter-step norm
  double decrease_tolerance = 1e-12;   // relative objective decrease of an accepted step
  double initial_lambda = 1e-3;
  double fd_step = 1e-6;               // relative central-difference step
};

struct Result {
  Eigen::VectorXd x;
  double objective = 0.0;  // sum of squared residuals
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Residual callback: writes r(x) into `r` (size fixed by the first call).
/// Returning false marks x as infeasible; such points are never accepted.
using ResidualFn = std::function<bool(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;

/// Levenberg-Marquardt with Marquardt diagonal scaling and a central
/// finite-difference Jacobian.
/// Optional box bounds are enforced by projecting every trial point.
inline Result minimize(const ResidualFn& fn, Eigen::VectorXd x0, const Options& opt = {},
                       const Eigen::VectorXd& lower = {}, const Eigen::VectorXd& upper = {}) {
  Result res;
  const Eigen::Index n = x0.size();
  auto project = [&](Eigen::VectorXd& x) {
    if (lower.size() == n) x = x.cwiseMax(lower);
    if (upper.size() == n) x = x.cwiseMin(upper);
  };
  project(x0);
  res.x = std::move(x0);

  Eigen::VectorXd r;
  ++res.evaluations;
  if (!fn(res.x, r)) {
    res.objective = std::numeric_limits<double>::infinity();
    return res;
  }
  res.objective = r.squaredNorm();
  if (n == 0) {
    res.converged = true;
    return res;
  }

  const Eigen::Index m = r.size();
  Eigen::MatrixXd J(m, n);
  Eigen::VectorXd rp(m), rm(m), rt(m);
  double lambda = opt.initial_lambda;

  auto jacobian = [&]() -> bool {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = opt.fd_step * (1.0 + std::abs(res.x[j]));
      Eigen::VectorXd xp = res.x, xm = res.x;
      xp[j] += h;
      xm[j] -= h;
      res.evaluations += 2;
      const bool okp = fn(xp, rp), okm = fn(xm, rm);
      if (okp && okm)
        J.col(j) = (rp - rm) / (2.0 * h);
      else if (okp)
        J.col(j) = (rp - r) / h;
      else if (okm)
        J.col(j) = (r - rm) / h;
      else
        return false;
    }
    return true;
  };

  for (res.iterations = 1; res.iterations <= opt.max_iterations; ++res.iterations) {
    if (!jacobian()) break;
    Eigen::MatrixXd A = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * r;
    // Parameters held at a bound by the gradient are frozen for this step.
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool at_lo = lower.size() == n && res.x[j] <= lower[j] && g[j] > 0.0;
      const bool at_hi = upper.size() == n && res.x[j] >= upper[j] && g[j] < 0.0;
      if (at_lo || at_hi) {
        A.row(j).setZero();
        A.col(j).setZero();
        A(j, j) = 1.0;
        g[j] = 0.0;
      }
    }
    Eigen::VectorXd d = A.diagonal();
    const double dmax = d.maxCoeff();
    if (!(dmax > 0.0)) {
      res.converged = true;  // flat objective: nothing left to fit
      break;
    }
    d = d.cwiseMax(1e-9 * dmax);

    bool accepted = false;
    bool tiny_step = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd M = A;
      M.diagonal() += lambda * d;
      Eigen::VectorXd xt = res.x + M.ldlt().solve(-g);
      if (!xt.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      project(xt);
      const Eigen::VectorXd step = xt - res.x;
      if (step.norm() < opt.step_tolerance) {
        tiny_step = true;
        break;
      }
      ++res.evaluations;
      if (fn(xt, rt)) {
        const double obj = rt.squaredNorm();
        if (obj < res.objective) {
          const double rel = (res.objective - obj) / std::max(res.objective, std::numeric_limits<double>::min());
          res.x = xt;
          r = rt;
          res.objective = obj;
          lambda = std::max(lambda / 3.0, 1e-12);
          accepted = true;
          if (rel < opt.decrease_tolerance || step.norm() < opt.step_tolerance) res.converged = true;
          break;
        }
      }
      lambda *= 4.0;
    }
    if (tiny_step || res.converged) {
      res.converged = true;
      break;
    }
    if (!accepted) {
      // Damping saturated without progress: at a (numerical) minimum.
      res.converged = true;
      break;
    }
  }
  if (res.iterations > opt.max_iterations) res.iterations = opt.max_iterations;
  return res;
}

}  // namespace rqot::lm
