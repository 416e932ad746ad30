#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "rqot/units.hpp"

namespace rqot {

/// Outcome of one identity over all parameter draws.
struct IdentityResult {
  std::string name;
  std::size_t draws = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

struct IdentityReport {
  std::vector<IdentityResult> results;
  double tolerance = 1e-6;

  bool all_passed() const {
    return std::all_of(results.begin(), results.end(), [](const IdentityResult& r) { return r.passed; });
  }
};

struct IdentitySettings {
  std::size_t draws = 100;
  double tolerance = 1e-6;
  std::uint64_t seed = 1;
  // Added to every right-hand side; a non-zero value must make the suite fail.
  double perturbation = 0.0;
};

namespace identity_detail {

inline double rel(double lhs, double rhs) {
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return std::abs(lhs - rhs) / scale;
}

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 25, 1e-13);
}

}  // namespace identity_detail

/// Numerical check of the algebraic and integral identities behind the
/// closed form: integrals by adaptive Gauss-Kronrod, semi-infinite
/// oscillatory ones by Ooura's double-exponential Fourier rule.
inline IdentityReport verify_identities(const IdentitySettings& s = {}) {
  using namespace identity_detail;
  using cd = std::complex<double>;
  std::mt19937_64 rng(s.seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto coin = [&]() { return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0; };
  const double eps = s.perturbation, pi = units::kPi;

  IdentityReport rep;
  rep.tolerance = s.tolerance;
  auto run = [&](const std::string& name, const std::function<double()>& draw) {
    IdentityResult r;
    r.name = name;
    for (std::size_t d = 0; d < s.draws; ++d) r.max_rel_error = std::max(r.max_rel_error, draw());
    r.draws = s.draws;
    r.passed = r.max_rel_error <= s.tolerance;
    rep.results.push_back(r);
  };

  run("multinomial", [&] {
    const double x = uni(-2, 2), y = uni(-2, 2), z = uni(-2, 2);
    double worst = 0.0;
    for (int i = 1; i <= 3; ++i) {
      double sum = 0.0;
      for (int l1 = 0; l1 <= i; ++l1)
        for (int l2 = 0; l1 + l2 <= i; ++l2)
          sum += std::tgamma(i + 1.0) / (std::tgamma(l1 + 1.0) * std::tgamma(l2 + 1.0) * std::tgamma(i - l1 - l2 + 1.0)) *
                 std::pow(x, l1) * std::pow(y, l2) * std::pow(z, i - l1 - l2);
      worst = std::max(worst, rel(std::pow(x + y + z, i), sum + eps));
    }
    return worst;
  });

  run("modulus", [&] {
    const cd z(uni(-5, 5), uni(-5, 5));
    const cd p = z * std::conj(z);
    return std::max(rel(std::norm(z), p.real() + eps), std::abs(p.imag()) / std::norm(z));
  });

  run("cross_term", [&] {
    const cd zi(uni(-5, 5), uni(-5, 5)), zj(uni(-5, 5), uni(-5, 5));
    const cd lhs = zi * std::conj(zj) + zj * std::conj(zi);
    const double rhs = 2.0 * (zi * std::conj(zj)).real();
    return std::max(rel(lhs.real(), rhs + eps), std::abs(lhs.imag()) / std::abs(rhs));
  });

  run("atan_integral", [&] {
    const double a = uni(0.1, 3), b = uni(0.1, 3), c = coin() * uni(0.1, 3), X = uni(0.1, 5);
    const double lhs = gk([&](double x) { return (a * b + c * c * x * x) / ((a * a + c * c * x * x) * (b * b + c * c * x * x)); }, 0, X);
    const double rhs = (std::atan(c * X / a) + std::atan(c * X / b)) / (c * (a + b));
    return rel(lhs, rhs + eps);
  });

  run("sin2_integral", [&] {
    const double a = uni(0.1, 3), b = uni(0.1, 3), c = coin() * uni(0.1, 3);
    const double lhs = gk(
        [&](double x) {
          const double s2 = std::sin(x) * std::sin(x);
          return (a * b + c * c * s2) / ((a * a + c * c * s2) * (b * b + c * c * s2));
        },
        0, pi / 2);
    const double rhs = pi / (2.0 * (a + b)) * (1.0 / std::sqrt(a * a + c * c) + 1.0 / std::sqrt(b * b + c * c));
    return rel(lhs, rhs + eps);
  });

  run("asinh_integral", [&] {
    const double d = uni(0.1, 5), X = uni(0.1, 5);
    const double lhs = gk([&](double x) { return x / std::sqrt(1.0 + d * d * x * x * x * x); }, 0, X);
    return rel(lhs, std::asinh(d * X * X) / (2.0 * d) + eps);
  });

  // Semi-infinite oscillatory integrals; a and b may take either sign.
  boost::math::quadrature::ooura_fourier_cos<double> fcos(1e-12);
  boost::math::quadrature::ooura_fourier_sin<double> fsin(1e-12);

  run("cos_integral", [&] {
    double a, b;
    do {
      a = coin() * uni(0.2, 3);
      b = uni(0.2, 3);
    } while (std::abs(a + b) < 0.2);
    const double c = coin() * uni(0.2, 3), L = uni(0.2, 3);
    const double w = std::abs(c) * L;
    auto f = [&](double x) { return (a * b + c * c * x * x) / ((a * a + c * c * x * x) * (b * b + c * c * x * x)); };
    const double lhs = fcos.integrate(f, w).first;
    const double rhs = pi / 2.0 * (std::exp(-std::abs(a * L)) * sgn(c / a) + std::exp(-std::abs(b * L)) * sgn(c / b)) / (c * (a + b));
    return rel(lhs, rhs + eps);
  });

  run("sin_integral", [&] {
    double a, b;
    do {
      a = coin() * uni(0.2, 3);
      b = uni(0.2, 3);
    } while (std::abs(a + b) < 0.2 || std::abs(std::abs(a) - b) < 0.05);
    const double c = coin() * uni(0.2, 3), L = uni(0.2, 3);
    const double w = std::abs(c) * L;
    // c x sin(c x L) = |c| x sin(|c| x L)
    auto f = [&](double x) { return (a - b) * std::abs(c) * x / ((a * a + c * c * x * x) * (b * b + c * c * x * x)); };
    const double lhs = fsin.integrate(f, w).first;
    const double rhs = pi / 2.0 * (std::exp(-std::abs(a * L)) * sgn(-c) + std::exp(-std::abs(b * L)) * sgn(c)) / (c * (a + b));
    return rel(lhs, rhs + eps);
  });
  return rep;
}

}  // namespace rqot
