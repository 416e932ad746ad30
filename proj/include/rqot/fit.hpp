#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "rqot/lm.hpp"
#include "rqot/raman.hpp"

namespace rqot {

/// Coefficients of the semi-analytical profile for one channel.
///
/// rho(z) = exp(-alpha z) [1 - u_f Leff(z) - u_b Leff~(z)] with
/// u_f = C_f P_f (f - f_hat) and u_b = C_b P_b (f - f_hat).
struct ChannelFit {
  double frequency = 0.0;
  double alpha = 0.0;    // 1/m
  double alpha_f = 0.0;  // 1/m
  double alpha_b = 0.0;  // 1/m
  double c_f = 0.0;      // 1/(m W Hz)
  double c_b = 0.0;      // 1/(m W Hz)
  double u_f = 0.0;      // 1/m
  double u_b = 0.0;      // 1/m

  // diagnostics, dB residuals fit - numeric over the solver grid
  double rms_residual_db = 0.0;
  double max_residual_db = 0.0;
  double weighted_residual_db = 0.0;  // mean |residual| weighted by rho_num
  double leff_error = 0.0;            // |int rho_fit - int rho_num| / int rho_num
  std::size_t iterations = 0;
  bool converged = false;

  friend bool operator==(const ChannelFit&, const ChannelFit&) = default;
};

struct ProfileFit {
  std::vector<ChannelFit> channels;
  double f_hat = 0.0;        // Hz
  double p_f = 0.0;          // W
  double p_b = 0.0;          // W
  double span_length = 0.0;  // m
  // Pump profiles, normalized to their z = 0 power; filled on request only.
  std::vector<ChannelFit> pumps;
  std::vector<double> pump_launch;  // W at z = 0

  std::size_t size() const { return channels.size(); }
  const ChannelFit& operator[](std::size_t i) const { return channels[i]; }

  friend bool operator==(const ProfileFit&, const ProfileFit&) = default;
};

struct FitOptions {
  lm::Options lm;
  // Bounds on alpha L, alpha_f L and alpha_b L. The lower bound keeps the
  // closed-form terms T_f = -u_f/alpha_f and T_b well conditioned.
  double min_alpha_l = 1e-2;
  double max_alpha_l = 200.0;
  // When > 1, alpha_i is held within [a / band, a * band] of the attenuation
  // curve a(f_i). Without it the redundant parameters can park alpha_i near
  // zero, which the fit tolerates but the closed-form SPM does not.
  double alpha_band = 2.0;
};

namespace fit_detail {

inline double leff(double a, double z) { return -std::expm1(-a * z) / a; }

inline double leff_b(double a, double z, double L) { return (std::exp(-a * (L - z)) - std::exp(-a * L)) / a; }

inline double rho(double alpha, double alpha_f, double alpha_b, double u_f, double u_b, double z, double L) {
  if (z == 0.0) return 1.0;
  double bracket = 1.0 - u_f * leff(alpha_f, z);
  if (u_b != 0.0) bracket -= u_b * leff_b(alpha_b, z, L);
  return std::exp(-alpha * z) * bracket;
}

inline double simpson_uniform(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 3 || n % 2 == 0) {
    double s = 0.0;
    for (std::size_t k = 1; k < n; ++k) s += 0.5 * h * (y[k] + y[k - 1]);
    return s;
  }
  double s = y.front() + y.back();
  for (std::size_t k = 1; k + 1 < n; ++k) s += (k % 2 ? 4.0 : 2.0) * y[k];
  return s * h / 3.0;
}

}  // namespace fit_detail

/// Evaluates the fitted profile of channel i at z (0 <= z <= L).
inline double eval_rho(const ProfileFit& fit, std::size_t i, double z) {
  const auto& c = fit.channels.at(i);
  return fit_detail::rho(c.alpha, c.alpha_f, c.alpha_b, c.u_f, c.u_b, z, fit.span_length);
}

/// Shared quantities of the fit: f_hat, P_f, P_b.
struct FitTotals {
  double f_hat = 0.0;
  double p_f = 0.0;
  double p_b = 0.0;
};

inline FitTotals fit_totals(const SpanConfig& span) {
  FitTotals t;
  t.f_hat = span.pumps.mean_frequency();
  t.p_f = span.channels.total_power() + span.pumps.total_power(PumpDirection::Forward);
  t.p_b = span.pumps.total_power(PumpDirection::Backward);
  return t;
}

/// Least-squares fit of one channel in the dB domain, weighted by rho_num.
inline ChannelFit fit_channel(const PowerProfile& prof, std::size_t i, const FiberSpec& fiber, const FitTotals& tot,
                              const FitOptions& opt = {}) {
  const std::vector<double> rho_num = normalized_profile(prof, i);
  const std::vector<double>& z = prof.z;
  const double L = prof.length();
  const std::size_t nz = z.size();

  double peak = 0.0;
  for (double r : rho_num) peak = std::max(peak, r);
  bool degenerate = true;
  for (std::size_t k = 1; k < nz; ++k)
    if (rho_num[k] > 0.0) degenerate = false;
  if (degenerate) throw NumericalError("fit_channel: degenerate profile (all zeros) for channel " + std::to_string(i));

  const double f = prof.entities[i].frequency;
  const double df = f - tot.f_hat;
  const bool use_b = tot.p_b > 0.0 && df != 0.0;
  const bool use_f = df != 0.0 || tot.f_hat == 0.0;

  std::vector<double> db_num(nz), sw(nz);
  double wsum = 0.0;
  for (std::size_t k = 0; k < nz; ++k) {
    db_num[k] = 10.0 * std::log10(std::max(rho_num[k], 1e-30));
    sw[k] = rho_num[k] / peak;
    wsum += sw[k];
  }
  for (auto& w : sw) w = std::sqrt(w / wsum);

  const double h = L / static_cast<double>(nz - 1);
  bool uniform = true;
  for (std::size_t k = 0; k < nz && uniform; ++k) uniform = std::abs(z[k] - h * static_cast<double>(k)) <= 1e-9 * L;

  // Parameters: ln(alpha L), ln(alpha_f L), ln(alpha_b L), u_f L, u_b L.
  // Free ones are packed in order; the others stay at their initial values.
  const double alpha0 = fiber.alpha(f);
  std::vector<int> free_idx = {0};
  if (use_f) free_idx.insert(free_idx.end(), {1, 3});
  if (use_b) free_idx.insert(free_idx.end(), {2, 4});

  auto unpack = [&](const Eigen::VectorXd& x, double base[5]) {
    for (std::size_t j = 0; j < free_idx.size(); ++j) base[free_idx[j]] = x[static_cast<Eigen::Index>(j)];
  };

  auto run = [&](const double init[5]) {
    lm::ResidualFn fn = [&, init](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
      double p[5];
      std::copy(init, init + 5, p);
      unpack(x, p);
      const double a = std::exp(p[0]) / L, af = std::exp(p[1]) / L, ab = std::exp(p[2]) / L;
      const double uf = p[3] / L, ub = p[4] / L;
      r.resize(static_cast<Eigen::Index>(nz));
      if (!uniform) {
        for (std::size_t k = 0; k < nz; ++k) {
          const double v = fit_detail::rho(a, af, ab, uf, ub, z[k], L);
          if (!(v > 0.0) || !std::isfinite(v)) return false;
          r[static_cast<Eigen::Index>(k)] = sw[k] * (10.0 * std::log10(v) - db_num[k]);
        }
        return true;
      }
      // Uniform grid: the exponentials follow from one factor per step.
      const double qf = std::exp(-af * h), qb = std::exp(ab * h), eb_l = std::exp(-ab * L);
      const double db_per_m = -10.0 * a / std::numbers::ln10;
      double ef = 1.0, eb = eb_l;
      r[0] = 0.0;
      for (std::size_t k = 1; k < nz; ++k) {
        ef *= qf;
        eb *= qb;
        const double bracket = 1.0 - uf * (1.0 - ef) / af - ub * (eb - eb_l) / ab;
        if (!(bracket > 0.0) || !std::isfinite(bracket)) return false;
        r[static_cast<Eigen::Index>(k)] =
            sw[k] * (db_per_m * z[k] + 10.0 * std::log10(bracket) - db_num[k]);
      }
      return true;
    };
    Eigen::VectorXd x0(static_cast<Eigen::Index>(free_idx.size()));
    for (std::size_t j = 0; j < free_idx.size(); ++j) x0[static_cast<Eigen::Index>(j)] = init[free_idx[j]];
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(x0.size(), -std::numeric_limits<double>::infinity());
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(x0.size(), std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < free_idx.size(); ++j)
      if (free_idx[j] < 3) {
        lo[static_cast<Eigen::Index>(j)] = std::log(opt.min_alpha_l);
        hi[static_cast<Eigen::Index>(j)] = std::log(opt.max_alpha_l);
      }
    if (opt.alpha_band > 1.0) {
      lo[0] = std::max(lo[0], std::log(alpha0 * L / opt.alpha_band));
      hi[0] = std::min(hi[0], std::log(alpha0 * L * opt.alpha_band));
    }
    auto res = lm::minimize(fn, x0, opt.lm, lo, hi);
    std::array<double, 5> p;
    std::copy(init, init + 5, p.begin());
    unpack(res.x, p.data());
    return std::make_pair(res, p);
  };

  // Initial guess: attenuation at f for all three decay rates, triangular
  // Raman slope for the gain terms. A second start without gain guards
  // against the triangular guess landing on a poor basin.
  const double cr = fiber.raman_gain.triangular_slope();
  const double lg = std::log(alpha0 * L);
  const double df_guess = tot.f_hat != 0.0 ? df : f - 0.5 * (prof.entities.front().frequency + prof.entities[prof.num_channels - 1].frequency);
  const double uf0 = use_f ? cr * tot.p_f * df_guess * L : 0.0;
  const double ub0 = use_b ? cr * tot.p_b * df * L : 0.0;
  const double lg5 = lg + std::log(5.0);
  const double starts[3][5] = {{lg, lg, lg, uf0, ub0}, {lg, lg, lg, 0.0, 0.0}, {lg, lg5, lg5, uf0, ub0}};

  auto best = run(starts[0]);
  for (int k = 1; k < 3; ++k) {
    auto alt = run(starts[k]);
    if (alt.first.objective < best.first.objective) best = alt;
  }
  if (!std::isfinite(best.first.objective))
    throw NumericalError("fit_channel: no feasible parameter set for channel " + std::to_string(i));

  const auto& p = best.second;
  ChannelFit c;
  c.frequency = f;
  c.alpha = std::exp(p[0]) / L;
  c.alpha_f = std::exp(p[1]) / L;
  c.alpha_b = std::exp(p[2]) / L;
  c.u_f = p[3] / L;
  c.u_b = p[4] / L;
  c.c_f = (tot.p_f > 0.0 && df != 0.0) ? c.u_f / (tot.p_f * df) : 0.0;
  c.c_b = (tot.p_b > 0.0 && df != 0.0) ? c.u_b / (tot.p_b * df) : 0.0;
  c.iterations = best.first.iterations;
  c.converged = best.first.converged;

  std::vector<double> rho_fit(nz);
  double sq = 0.0, mx = 0.0, wabs = 0.0, wtot = 0.0;
  for (std::size_t k = 0; k < nz; ++k) {
    rho_fit[k] = fit_detail::rho(c.alpha, c.alpha_f, c.alpha_b, c.u_f, c.u_b, z[k], L);
    const double res = 10.0 * std::log10(rho_fit[k]) - db_num[k];
    sq += res * res;
    mx = std::max(mx, std::abs(res));
    wabs += rho_num[k] * std::abs(res);
    wtot += rho_num[k];
  }
  c.rms_residual_db = std::sqrt(sq / static_cast<double>(nz));
  c.max_residual_db = mx;
  c.weighted_residual_db = wabs / wtot;
  const double i_fit = fit_detail::simpson_uniform(rho_fit, h), i_num = fit_detail::simpson_uniform(rho_num, h);
  c.leff_error = std::abs(i_fit - i_num) / i_num;
  return c;
}

/// Fits every channel of a solved span.
inline ProfileFit fit_all(const PowerProfile& prof, const SpanConfig& span, const FitOptions& opt = {}) {
  if (prof.num_channels != span.channels.size()) throw InputError("fit_all: profile does not match the span's channel plan");
  const FitTotals tot = fit_totals(span);
  ProfileFit fit;
  fit.f_hat = tot.f_hat;
  fit.p_f = tot.p_f;
  fit.p_b = tot.p_b;
  fit.span_length = prof.length();
  fit.channels.reserve(prof.num_channels);
  for (std::size_t i = 0; i < prof.num_channels; ++i) {
    try {
      fit.channels.push_back(fit_channel(prof, i, span.fiber, tot, opt));
    } catch (const NumericalError& e) {
      throw NumericalError("fit_all: channel " + std::to_string(i) + ": " + e.what());
    }
  }
  return fit;
}

/// Adds fits of the pump profiles, used when pumps act as NLI interferers.
inline void fit_pumps(ProfileFit& fit, const PowerProfile& prof, const SpanConfig& span, const FitOptions& opt = {}) {
  const FitTotals tot = fit_totals(span);
  fit.pumps.clear();
  fit.pump_launch.clear();
  for (std::size_t e = prof.num_channels; e < prof.entities.size(); ++e) {
    try {
      fit.pumps.push_back(fit_channel(prof, e, span.fiber, tot, opt));
    } catch (const NumericalError& err) {
      throw NumericalError("fit_pumps: pump " + std::to_string(e - prof.num_channels) + ": " + err.what());
    }
    fit.pump_launch.push_back(prof.power(e, 0));
  }
}

/// Lumped profile (no Raman terms) for every channel of a span.
inline ProfileFit lumped_fit(const SpanConfig& span) {
  ProfileFit fit;
  fit.span_length = span.fiber.span_length;
  fit.p_f = span.channels.total_power();
  for (const auto& ch : span.channels.channels) {
    ChannelFit c;
    c.frequency = ch.frequency;
    c.alpha = c.alpha_f = c.alpha_b = span.fiber.alpha(ch.frequency);
    c.converged = true;
    fit.channels.push_back(c);
  }
  return fit;
}

/// Power-weighted mean of the per-channel weighted dB residuals.
inline double mean_weighted_residual_db(const ProfileFit& fit, const ChannelPlan& plan) {
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < fit.size(); ++i) {
    s += plan[i].power * fit[i].weighted_residual_db;
    w += plan[i].power;
  }
  return s / w;
}

/// CSV: one row per channel with coefficients and residuals.
inline void write_fit_csv(std::ostream& os, const ProfileFit& fit) {
  os << "wavelength_nm,alpha_1_m,alpha_f_1_m,alpha_b_1_m,c_f_1_m_w_hz,c_b_1_m_w_hz,rms_residual_db,max_residual_db,"
        "weighted_residual_db,leff_error\n";
  char buf[320];
  for (const auto& c : fit.channels) {
    std::snprintf(buf, sizeof buf, "%.4f,%.9e,%.9e,%.9e,%.9e,%.9e,%.6f,%.6f,%.6f,%.6e\n", units::hz_to_nm(c.frequency),
                  c.alpha, c.alpha_f, c.alpha_b, c.c_f, c.c_b, c.rms_residual_db, c.max_residual_db,
                  c.weighted_residual_db, c.leff_error);
    os << buf;
  }
}

}  // namespace rqot
