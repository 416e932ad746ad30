#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rqot/ode.hpp"

using namespace rqot;

namespace {

std::vector<double> grid(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  return g;
}

}  // namespace

TEST(Ode, ExponentialDecayAtEveryGridPoint) {
  const double lambda = 4.6e-5;
  const auto g = grid(0.0, 80e3, 1001);
  ode::Settings s;
  auto t = ode::integrate([&](double, const std::vector<double>& y, std::vector<double>& d) { d[0] = -lambda * y[0]; }, g,
                          {1e-3}, s);
  ASSERT_EQ(t.grid.size(), g.size());
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(t.at(k, 0) / (1e-3 * std::exp(-lambda * g[k])), 1.0, 1e-7);
  EXPECT_GT(t.stats.accepted, 0u);
}

TEST(Ode, HarmonicOscillatorDenseOutput) {
  const auto g = grid(0.0, 10.0, 257);
  ode::Settings s;
  s.initial_step = 1e-2;
  s.rtol = 1e-10;
  s.atol = 1e-12;
  s.clamp_negative = false;
  auto t = ode::integrate(
      [](double, const std::vector<double>& y, std::vector<double>& d) {
        d[0] = y[1];
        d[1] = -y[0];
      },
      g, {0.0, 1.0}, s);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(t.at(k, 0), std::sin(g[k]), 1e-8);
    EXPECT_NEAR(t.at(k, 1), std::cos(g[k]), 1e-8);
  }
}

TEST(Ode, TighterToleranceConverges) {
  auto run = [](double rtol) {
    ode::Settings s;
    s.rtol = rtol;
    s.initial_step = 1e-3;
    auto t = ode::integrate([](double x, const std::vector<double>& y, std::vector<double>& d) { d[0] = y[0] * std::cos(x); },
                            grid(0.0, 20.0, 3), {1.0}, s);
    return t.at(2, 0);
  };
  const double exact = std::exp(std::sin(20.0));
  const double coarse = run(1e-6), fine = run(1e-10);
  EXPECT_LT(std::abs(fine - exact), std::abs(coarse - exact) + 1e-12);
  EXPECT_NEAR(fine / exact, 1.0, 1e-8);
}

TEST(Ode, LargeNegativeExcursionIsError) {
  ode::Settings s;
  s.initial_step = 1e-3;
  EXPECT_THROW(ode::integrate([](double, const std::vector<double>&, std::vector<double>& d) { d[0] = -1.0; },
                              std::vector<double>{0.0, 2.0}, {1.0}, s),
               NumericalError);
}

TEST(Ode, SmallNegativeRoundoffIsClamped) {
  // Decay far below atol: the state may dip below zero by round-off only.
  ode::Settings s;
  s.atol = 1e-3;
  s.rtol = 1e-3;
  auto t = ode::integrate([](double, const std::vector<double>& y, std::vector<double>& d) { d[0] = -50.0 * y[0]; },
                          grid(0.0, 10.0, 11), {1.0}, s);
  for (std::size_t k = 0; k < 11; ++k) EXPECT_GE(t.at(k, 0), 0.0);
}

TEST(Ode, Errors) {
  ode::Settings s;
  auto f = [](double, const std::vector<double>& y, std::vector<double>& d) { d[0] = y[0]; };
  EXPECT_THROW(ode::integrate(f, std::vector<double>{0.0}, {1.0}, s), NumericalError);
  ode::Settings bad = s;
  bad.rtol = 0.0;
  EXPECT_THROW(ode::integrate(f, grid(0.0, 1.0, 3), {1.0}, bad), NumericalError);
  ode::Settings blow = s;
  blow.max_value = 10.0;
  blow.initial_step = 1e-3;
  EXPECT_THROW(ode::integrate([](double, const std::vector<double>& y, std::vector<double>& d) { d[0] = y[0] * y[0]; },
                              grid(0.0, 2.0, 3), {1.0}, blow),
               NumericalError);
  ode::Settings few = s;
  few.max_steps = 3;
  few.initial_step = 1e-6;
  EXPECT_THROW(ode::integrate(f, grid(0.0, 1.0, 3), {1.0}, few), NumericalError);
}
