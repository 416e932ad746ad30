#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "helpers.hpp"

using namespace rqot;

namespace {

double lumped_mu(double a, double L, double phi) {
  return (1.0 + std::exp(-2 * a * L) - 2.0 * std::exp(-a * L) * std::cos(phi * L)) / (a * a + phi * phi);
}

SpanConfig subsample(SpanConfig span, std::size_t stride) {
  ChannelPlan sub;
  for (std::size_t i = 0; i < span.channels.size(); i += stride) sub.channels.push_back(span.channels[i]);
  span.channels = sub;
  return span;
}

RhoSource lumped_source(const SpanConfig& span, std::size_t samples = 2001) {
  return rho_from_fit(lumped_fit(span), span, samples);
}

}  // namespace

TEST(LinkFunctionNumeric, LumpedZeroPhaseIsLeffSquared) {
  const auto span = test::toy_span(1, 100e9, 1e-3);
  const auto src = lumped_source(span);
  const double a = span.fiber.alpha(span.channels[0].frequency), L = 80e3;
  const double leff = -std::expm1(-a * L) / a;
  const double f = span.channels[0].frequency;
  EXPECT_NEAR(link_function_numeric(src, span.fiber, f, f, f) / (leff * leff), 1.0, 1e-8);
}

TEST(LinkFunctionNumeric, LumpedHalfPeriodPhase) {
  const auto span = test::toy_span(3, 100e9, 1e-3);
  const auto src = lumped_source(span);
  const double a = span.fiber.alpha(span.channels[1].frequency), L = 80e3, pi = units::kPi;
  // choose f2 so that phi L = pi for f1 - f_i = 30 GHz
  const double fi = span.channels[1].frequency, d1 = 30e9;
  const auto& fb = span.fiber;
  double d2 = 100e9;
  for (int it = 0; it < 60; ++it) {
    const double phi = -4 * pi * pi * d1 * d2 * (fb.beta2 + pi * fb.beta3 * (fb.relative(fi + d1) + fb.relative(fi + d2)));
    d2 *= pi / (phi * L);
  }
  const double phi = -4 * pi * pi * d1 * d2 * (fb.beta2 + pi * fb.beta3 * (fb.relative(fi + d1) + fb.relative(fi + d2)));
  ASSERT_NEAR(phi * L, pi, 1e-9);
  const double expect = (1.0 + std::exp(-a * L)) * (1.0 + std::exp(-a * L)) / (a * a + phi * phi);
  EXPECT_NEAR(expect / lumped_mu(a, L, phi), 1.0, 1e-14);
  EXPECT_NEAR(link_function_numeric(src, fb, fi + d1, fi + d2, fi) / expect, 1.0, 1e-6);
}

TEST(LinkFunctionNumeric, AgreesWithClosedFormOnFittedProfile) {
  for (const char* name : {"fw.json", "bw.json"}) {
    const auto span = subsample(test::scenario(name).spans[0], 10);
    const auto fit = fit_all(solve_span(span), span);
    const auto src = rho_from_fit(fit, span);
    for (auto [i, k] : {std::pair<std::size_t, std::size_t>{3, 4}, {0, 13}, {10, 2}}) {
      const double fi = span.channels[i].frequency, fk = span.channels[k].frequency;
      const double f1 = fi + 40e9, f2 = fk - 20e9;
      const auto& fb = span.fiber;
      const double pi = units::kPi;
      const double phi = -4 * pi * pi * (f1 - fi) * (f2 - fi) * (fb.beta2 + pi * fb.beta3 * (fb.relative(f1) + fb.relative(f2)));
      const double closed = link_function_closed(compute_terms(fit, k), phi);
      EXPECT_NEAR(link_function_numeric(src, fb, f1, f2, fi) / closed, 1.0, 0.02) << name << " " << i << " " << k;
    }
  }
}

TEST(LinkTable, MatchesLumpedAnalyticAcrossCore) {
  const double a = 4.6e-5, L = 80e3;
  const std::size_t n = 20001;
  std::vector<double> rho(n);
  for (std::size_t k = 0; k < n; ++k) rho[k] = std::exp(-a * L * static_cast<double>(k) / static_cast<double>(n - 1));
  LinkTable tab(rho, L, -a, -a * std::exp(-a * L));
  const double leff = -std::expm1(-a * L) / a;
  EXPECT_NEAR(tab.mu0() / (leff * leff), 1.0, 1e-8);
  for (double phi : {1.7e-6, 3.9e-5, 2.1e-4, 1.05e-3, 0.9 * tab.cutoff(), 3.0 * tab.cutoff(), 100.0 * tab.cutoff()})
    EXPECT_NEAR(tab.mu(phi) / lumped_mu(a, L, phi), 1.0, 1e-5) << phi;
}

TEST(LinkTable, ParsevalAndWeightedIntegral) {
  // int_R mu dphi = 2 pi int_0^L rho^2 dz
  const double a = 4.6e-5, L = 80e3;
  const std::size_t n = 2001;
  std::vector<double> rho(n);
  for (std::size_t k = 0; k < n; ++k) rho[k] = std::exp(-a * L * static_cast<double>(k) / static_cast<double>(n - 1));
  LinkTable tab(rho, L, -a, -a * std::exp(-a * L));
  const double big = 1e4 * tab.cutoff();
  const double tail = 2.0 * (1.0 + std::exp(-2 * a * L)) / big;  // 2 int_big^inf (rho0^2 + rhoL^2)/phi^2
  const double parseval = 2.0 * units::kPi * (-std::expm1(-2 * a * L) / (2 * a));
  EXPECT_NEAR((tab.integrate(-big, big, [](double) { return 1.0; }) + tail) / parseval, 1.0, 1e-5);

  // A linear weight on a finite window against Gauss-Kronrod of the analytic mu.
  auto w = [](double phi) { return 1.0 + 300.0 * phi; };
  const double lo = -2e-4, hi = 7e-4;
  double ref = 0.0;
  for (int p = 0; p < 200; ++p) {
    const double x0 = lo + (hi - lo) * p / 200.0, x1 = lo + (hi - lo) * (p + 1) / 200.0;
    ref += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double phi) { return lumped_mu(a, L, phi) * w(phi); }, x0, x1, 10, 1e-12);
  }
  EXPECT_NEAR(tab.integrate(lo, hi, w) / ref, 1.0, 1e-5);
  EXPECT_NEAR(tab.integrate(hi, lo, w), -tab.integrate(lo, hi, w), 1e-12 * std::abs(ref));
}

TEST(IntegralModel, LumpedToyMatchesClosedForm) {
  const auto span = test::scenario("cband_toy.json").spans[0];
  const auto fit = lumped_fit(span);
  IntegralEngine eng(rho_from_fit(fit, span), span.fiber);
  const auto closed = closed_span_nli(span, fit, false);
  const auto num = eng.span_nli(false);
  for (std::size_t i = 0; i < span.channels.size(); ++i) {
    EXPECT_NEAR(closed.eta_xpm[i] / num.eta_xpm[i], 1.0, 0.05) << i;
    EXPECT_NEAR(closed.eta_spm[i] / num.eta_spm[i], 1.0, 0.10) << i;
  }
}

TEST(IntegralModel, TwoChannelSelfConvergence) {
  auto span = test::toy_span(2, 200e9, 1e-3);
  span.fiber.beta3 = 0.0;
  const auto fit = lumped_fit(span);
  QuadratureSettings fine;
  fine.grid_points = 2 * fine.grid_points - 1;
  fine.oversample *= 2;
  fine.fit_samples = 2 * fine.fit_samples - 1;
  fine.rel_tol /= 10.0;
  const double ref = eta_xpm_numeric(rho_from_fit(fit, span, fine.fit_samples), span.fiber, 0, 1, fine);
  const double def = eta_xpm_numeric(rho_from_fit(fit, span), span.fiber, 0, 1);
  EXPECT_NEAR(def / ref, 1.0, 0.005);
  const double ref_s = eta_spm_numeric(rho_from_fit(fit, span, fine.fit_samples), span.fiber, 0, fine);
  const double def_s = eta_spm_numeric(rho_from_fit(fit, span), span.fiber, 0);
  EXPECT_NEAR(def_s / ref_s, 1.0, 0.005);
}

TEST(IntegralModel, ZeroInterfererPowerGivesZero) {
  const auto span = test::toy_span(3, 100e9, 1e-3);
  auto src = lumped_source(span);
  src.power[2] = 0.0;
  EXPECT_EQ(eta_xpm_numeric(src, span.fiber, 0, 2), 0.0);
}

TEST(IntegralModel, SpmDecreasesWithBandwidthInNarrowLimit) {
  std::vector<double> eta;
  for (double b : {1e9, 2e9, 4e9}) {
    auto span = test::toy_span(1, 100e9, 1e-3);
    span.channels.channels[0].bandwidth = b;
    const double v = eta_spm_numeric(lumped_source(span), span.fiber, 0);
    EXPECT_TRUE(std::isfinite(v));
    eta.push_back(v);
  }
  EXPECT_GT(eta[0], eta[1]);
  EXPECT_GT(eta[1], eta[2]);
}

TEST(IntegralModel, GammaScaling) {
  auto span = test::toy_span(3, 100e9, 1e-3);
  const auto src = lumped_source(span);
  const double s1 = eta_spm_numeric(src, span.fiber, 1), x1 = eta_xpm_numeric(src, span.fiber, 1, 0);
  span.fiber.gamma *= 2.0;
  EXPECT_NEAR(eta_spm_numeric(src, span.fiber, 1) / s1, 4.0, 1e-12);
  EXPECT_NEAR(eta_xpm_numeric(src, span.fiber, 1, 0) / x1, 4.0, 1e-12);
}

TEST(IntegralModel, WindowEffectIsBoundedAndReported) {
  const auto span = test::scenario("cband_toy.json").spans[0];
  const auto src = lumped_source(span);
  QuadratureSettings off;
  off.pi_window = false;
  for (std::size_t k : {1u, 2u, 4u}) {
    const double on = eta_xpm_numeric(src, span.fiber, 0, k), no = eta_xpm_numeric(src, span.fiber, 0, k, off);
    const double change = no / on - 1.0;
    RecordProperty("window_change_k" + std::to_string(k), std::to_string(change));
    EXPECT_GE(change, 0.0);
    EXPECT_LT(change, 0.1);
  }
}

TEST(IntegralModel, RawVersusFittedProfile) {
  const auto span = subsample(test::scenario("fwbw.json").spans[0], 13);
  const auto prof = solve_span(span);
  const auto fit = fit_all(prof, span);
  const auto plan = LinkPlan::uniform(span, 1);
  const auto a = eta_total_integral(plan, {rho_from_fit(fit, span)});
  const auto b = eta_total_integral(plan, {rho_from_profile(prof, span)});
  for (std::size_t i = 0; i < span.channels.size(); ++i) EXPECT_LT(std::abs(a[i].snr_db - b[i].snr_db), 0.3) << i;
  EXPECT_EQ(a.method, "integral");
}

TEST(IntegralModel, MultiSpanMatchesClosedStructure) {
  const auto span = test::toy_span(3, 100e9, 1e-3);
  const auto src = lumped_source(span);
  const auto one = eta_total_integral(LinkPlan::uniform(span, 1), {src});
  const auto five = eta_total_integral(LinkPlan::uniform(span, 5), {src});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(five[i].eta_n / one[i].eta_n, 5.0, 1e-12);
}

TEST(IntegralModel, Errors) {
  QuadratureSettings s;
  s.grid_points = 200;
  EXPECT_THROW(s.validate(), InputError);
  s.grid_points = 201;
  s.rel_tol = 0.0;
  EXPECT_THROW(s.validate(), InputError);

  auto span = test::toy_span(3, 100e9, 1e-3, test::scenario("cband_toy.json").spans[0].fiber);
  span.pumps.pumps = {{units::nm_to_hz(1450.0), PumpDirection::Forward, 0.3}};
  const auto prof = solve_span(span);
  const auto fit = fit_all(prof, span);
  const auto src = rho_from_fit(fit, span);
  EXPECT_THROW(eta_xpm_numeric(src, span.fiber, 1, 1), InputError);
  EXPECT_THROW(eta_total_integral(LinkPlan::uniform(span, 1, 0.0, true), {src}), InputError);
  EXPECT_NO_THROW(eta_total_integral(LinkPlan::uniform(span, 1, 0.0, true), {rho_from_profile(prof, span)}));

  auto bad = prof;
  bad.z[5] += 1.0;
  EXPECT_THROW(rho_from_profile(bad, span), InputError);
}
