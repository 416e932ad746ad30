#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>

#include "rqot/identities.hpp"

using namespace rqot;

TEST(Identities, AllPassWithinTolerance) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = verify_identities();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 10.0);
  EXPECT_TRUE(rep.all_passed());
  ASSERT_EQ(rep.results.size(), 8u);
  for (const auto& r : rep.results) {
    EXPECT_GE(r.draws, 100u) << r.name;
    EXPECT_LE(r.max_rel_error, 1e-6) << r.name;
    EXPECT_TRUE(r.passed) << r.name;
  }
}

TEST(Identities, ReportListsEveryIdentityByName) {
  const auto rep = verify_identities({.draws = 5});
  std::vector<std::string> names;
  for (const auto& r : rep.results) names.push_back(r.name);
  EXPECT_EQ(names, (std::vector<std::string>{"multinomial", "modulus", "cross_term", "atan_integral", "sin2_integral",
                                             "asinh_integral", "cos_integral", "sin_integral"}));
}

TEST(Identities, PerturbationIsDetected) {
  const auto rep = verify_identities({.draws = 20, .perturbation = 1e-2});
  EXPECT_FALSE(rep.all_passed());
  for (const auto& r : rep.results) EXPECT_FALSE(r.passed) << r.name;
}

TEST(Identities, DeterministicUnderSeed) {
  const auto a = verify_identities({.draws = 10, .seed = 42});
  const auto b = verify_identities({.draws = 10, .seed = 42});
  for (std::size_t k = 0; k < a.results.size(); ++k) EXPECT_EQ(a.results[k].max_rel_error, b.results[k].max_rel_error);
}

TEST(Identities, AtanIntegralAtUnitParameters) {
  // a = b = c = X = 1: integrand 1/(1 + x^2), value pi/4
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double x) { return (1.0 + x * x) / ((1.0 + x * x) * (1.0 + x * x)); }, 0.0, 1.0, 15, 1e-14);
  EXPECT_NEAR(v, (std::atan(1.0) + std::atan(1.0)) / 2.0, 1e-14);
  EXPECT_NEAR(v, std::numbers::pi / 4.0, 1e-14);
}

TEST(Identities, Sin2IntegralWithEqualCoefficients) {
  const double a = 1.3, c = 0.7, pi = std::numbers::pi;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) {
        const double s2 = std::sin(x) * std::sin(x);
        return 1.0 / (a * a + c * c * s2);
      },
      0.0, pi / 2.0, 15, 1e-14);
  EXPECT_NEAR(v / (pi / (4.0 * a) * 2.0 / std::sqrt(a * a + c * c)), 1.0, 1e-9);
}

TEST(Identities, MultinomialFirstOrder) {
  const double x = 0.3, y = -1.2, z = 2.5;
  double s = 0.0;
  for (int l1 = 0; l1 <= 1; ++l1)
    for (int l2 = 0; l1 + l2 <= 1; ++l2) s += std::pow(x, l1) * std::pow(y, l2) * std::pow(z, 1 - l1 - l2);
  EXPECT_DOUBLE_EQ(s, x + y + z);
}
