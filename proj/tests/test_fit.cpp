#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"

using namespace rqot;

namespace {

PowerProfile synthetic(double f, double a, double af, double ab, double uf, double ub, double L, std::size_t n = 1001) {
  PowerProfile p;
  p.z = raman_detail::uniform_grid(L, n);
  p.entities = {{f, EntityKind::Channel}};
  p.num_channels = 1;
  for (double z : p.z) p.powers.push_back(1e-3 * fit_detail::rho(a, af, ab, uf, ub, z, L));
  return p;
}

}  // namespace

TEST(FitModel, BoundaryAndLumpedReduction) {
  const double L = 80e3;
  EXPECT_EQ(fit_detail::rho(4.6e-5, 5e-5, 6e-5, -3e-5, 2e-5, 0.0, L), 1.0);
  for (double z : {1e3, 20e3, 80e3}) EXPECT_DOUBLE_EQ(fit_detail::rho(4.6e-5, 5e-5, 6e-5, 0.0, 0.0, z, L), std::exp(-4.6e-5 * z));
  EXPECT_NEAR(fit_detail::rho(4.6e-5, 5e-5, 6e-5, 0.0, 0.0, 80e3, L), 0.02522, 1e-5);
  EXPECT_NEAR(fit_detail::leff(4.6e-5, 0.0), 0.0, 0.0);
  EXPECT_NEAR(fit_detail::leff_b(6e-5, 0.0, L), 0.0, 1e-12);
}

TEST(FitModel, EvalRhoAtZeroIsExactlyOne) {
  ProfileFit fit;
  fit.span_length = 80e3;
  fit.channels.push_back({});
  fit.channels[0].alpha = fit.channels[0].alpha_f = fit.channels[0].alpha_b = 4e-5;
  fit.channels[0].u_f = 1e-5;
  fit.channels[0].u_b = -1e-5;
  EXPECT_EQ(eval_rho(fit, 0, 0.0), 1.0);
}

TEST(Fit, RecoversSyntheticProfile) {
  const double L = 80e3, f = units::nm_to_hz(1550.0);
  const double a = 4.6e-5, af = 5e-5, ab = 6e-5, uf = -2e-5, ub = -1.5e-5;
  const auto prof = synthetic(f, a, af, ab, uf, ub, L);
  FitTotals tot{f + 10e12, 0.3, 0.2};
  const auto fiber = test::flat_fiber(0.2);
  const auto c = fit_channel(prof, 0, fiber, tot);
  double worst = 0.0;
  for (double z : prof.z) {
    const double fit_db = 10.0 * std::log10(fit_detail::rho(c.alpha, c.alpha_f, c.alpha_b, c.u_f, c.u_b, z, L));
    const double true_db = 10.0 * std::log10(fit_detail::rho(a, af, ab, uf, ub, z, L));
    worst = std::max(worst, std::abs(fit_db - true_db));
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_LT(c.leff_error, 1e-8);
}

TEST(Fit, LossOnlyProfile) {
  auto span = test::toy_span(3, 100e9, 1e-3, test::scenario("cband_toy.json").spans[0].fiber);
  span.fiber.raman_gain = RamanGainCurve::zero();
  const auto prof = solve_span(span);
  const auto fit = fit_all(prof, span);
  ASSERT_EQ(fit.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LT(fit[i].rms_residual_db, 0.01);
    EXPECT_NEAR(fit[i].alpha / span.fiber.alpha(span.channels[i].frequency), 1.0, 0.01);
    EXPECT_EQ(eval_rho(fit, i, 0.0), 1.0);
  }
}

TEST(Fit, IsrsOnlyReducesToLumpedForm) {
  auto span = test::scenario("isrs_only.json").spans[0];
  // keep the run short: every 10th channel of the full grid
  ChannelPlan sub;
  for (std::size_t i = 0; i < span.channels.size(); i += 10) sub.channels.push_back(span.channels[i]);
  span.channels = sub;
  const auto prof = solve_span(span);
  const auto fit = fit_all(prof, span);
  EXPECT_EQ(fit.f_hat, 0.0);
  EXPECT_EQ(fit.p_b, 0.0);
  for (const auto& c : fit.channels) {
    EXPECT_EQ(c.c_b, 0.0);
    EXPECT_EQ(c.u_b, 0.0);
    EXPECT_LT(c.leff_error, 0.01);
    EXPECT_LT(c.max_residual_db, 0.1);
  }
  // ISRS tilt: high-frequency channels (back) lose power to low-frequency ones (front).
  EXPECT_LT(fit.channels.front().u_f, 0.0);
  EXPECT_GT(fit.channels.back().u_f, 0.0);
}

TEST(Fit, SingleChannelSingleForwardPump) {
  auto span = test::toy_span(1, 100e9, 1e-3, test::scenario("cband_toy.json").spans[0].fiber);
  span.pumps.pumps = {{units::nm_to_hz(1450.0), PumpDirection::Forward, 0.3}};
  const auto prof = solve_span(span);
  const auto fit = fit_all(prof, span);
  EXPECT_EQ(eval_rho(fit, 0, 0.0), 1.0);
  EXPECT_TRUE(std::isfinite(fit[0].alpha));
  EXPECT_LT(fit[0].leff_error, 0.05);
  EXPECT_EQ(fit.f_hat, units::nm_to_hz(1450.0));
}

TEST(Fit, Deterministic) {
  auto span = test::scenario("fwbw.json").spans[0];
  ChannelPlan sub;
  for (std::size_t i = 0; i < span.channels.size(); i += 26) sub.channels.push_back(span.channels[i]);
  span.channels = sub;
  const auto prof = solve_span(span);
  EXPECT_EQ(fit_all(prof, span), fit_all(prof, span));
}

TEST(Fit, PumpProfilesOnRequest) {
  auto span = test::toy_span(3, 100e9, 1e-3, test::scenario("cband_toy.json").spans[0].fiber);
  span.pumps.pumps = {{units::nm_to_hz(1450.0), PumpDirection::Forward, 0.3}};
  const auto prof = solve_span(span);
  auto fit = fit_all(prof, span);
  EXPECT_TRUE(fit.pumps.empty());
  fit_pumps(fit, prof, span);
  ASSERT_EQ(fit.pumps.size(), 1u);
  EXPECT_DOUBLE_EQ(fit.pump_launch[0], 0.3);
  EXPECT_LT(fit.pumps[0].leff_error, 0.05);
}

TEST(Fit, DegenerateProfileRejected) {
  PowerProfile p;
  p.z = raman_detail::uniform_grid(80e3, 11);
  p.entities = {{193e12, EntityKind::Channel}};
  p.num_channels = 1;
  p.powers.assign(11, 0.0);
  p.powers[0] = 1e-3;
  EXPECT_THROW(fit_channel(p, 0, test::flat_fiber(), {}), NumericalError);
  p.powers[0] = 0.0;
  EXPECT_THROW(fit_channel(p, 0, test::flat_fiber(), {}), InputError);
}

TEST(Fit, CsvHasUnitHeaderAndOneRowPerChannel) {
  auto span = test::toy_span(3, 100e9, 1e-3);
  const auto fit = fit_all(solve_span(span), span);
  std::ostringstream os;
  write_fit_csv(os, fit);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("wavelength_nm,alpha_1_m,", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
}
