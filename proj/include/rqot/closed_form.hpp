#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "rqot/fit.hpp"

namespace rqot {

/// Summation index pairs (l1, l2) of the profile expansion: (0,0), (1,0), (0,1).
inline constexpr std::array<std::array<int, 2>, 3> kIndexPairs = {{{0, 0}, {1, 0}, {0, 1}}};

/// Per-channel quantities of the closed-form link function.
struct ClosedFormTerms {
  double t_f = 0.0, t_b = 0.0, t = 1.0;
  std::array<double, 3> upsilon{}, alpha_l{}, kappa_f{}, kappa_b{};
  double span_length = 0.0;
};

struct ClosedFormOptions {
  // The sin(phi L) term of the closed-form link function is printed with a
  // + sign; expanding the modulus gives -. Kept switchable for comparison.
  bool sin_term_as_printed = false;
};

/// phi_i = -4 pi^2 (beta2 + 2 pi beta3 f_i), f_i relative to the dispersion reference.
inline double phi_spm(const FiberSpec& fiber, double f_i) {
  const double pi = units::kPi;
  return -4.0 * pi * pi * (fiber.beta2 + 2.0 * pi * fiber.beta3 * fiber.relative(f_i));
}

/// phi_{i,k} = -4 pi^2 (f_k - f_i) [beta2 + pi beta3 (f_i + f_k)].
inline double phi_xpm(const FiberSpec& fiber, double f_i, double f_k) {
  const double pi = units::kPi;
  return -4.0 * pi * pi * (f_k - f_i) * (fiber.beta2 + pi * fiber.beta3 * (fiber.relative(f_i) + fiber.relative(f_k)));
}

inline ClosedFormTerms compute_terms(const ChannelFit& c, double span_length) {
  ClosedFormTerms t;
  const double L = span_length;
  t.span_length = L;
  t.t_f = -c.u_f / c.alpha_f;
  t.t_b = -c.u_b / c.alpha_b;
  t.t = 1.0 + t.t_f - t.t_b * std::exp(-c.alpha_b * L);
  if (t.t == 0.0 || !std::isfinite(t.t)) throw NumericalError("compute_terms: degenerate fit (T = 0)");
  for (std::size_t p = 0; p < 3; ++p) {
    const int l1 = kIndexPairs[p][0], l2 = kIndexPairs[p][1];
    t.upsilon[p] = t.t * std::pow(-t.t_f / t.t, l1) * std::pow(t.t_b / t.t, l2);
    t.alpha_l[p] = c.alpha + l1 * c.alpha_f - l2 * c.alpha_b;
    t.kappa_f[p] = std::exp(-(c.alpha + l1 * c.alpha_f) * L);
    t.kappa_b[p] = std::exp(-l2 * c.alpha_b * L);
  }
  return t;
}

inline ClosedFormTerms compute_terms(const ProfileFit& fit, std::size_t k) {
  return compute_terms(fit.channels.at(k), fit.span_length);
}

/// tau(zeta) = sum_p Upsilon_p exp(-(l1 alpha_f zeta + l2 alpha_b (L - zeta))).
inline double tau(const ClosedFormTerms& t, const ChannelFit& c, double zeta) {
  double s = 0.0;
  for (std::size_t p = 0; p < 3; ++p) {
    const int l1 = kIndexPairs[p][0], l2 = kIndexPairs[p][1];
    s += t.upsilon[p] * std::exp(-(l1 * c.alpha_f * zeta + l2 * c.alpha_b * (t.span_length - zeta)));
  }
  return s;
}

namespace closed_detail {

inline double sgn(double x) {
  if (x == 0.0 || !std::isfinite(x)) throw NumericalError("closed form: sign() of zero argument");
  return x > 0.0 ? 1.0 : -1.0;
}

// sign(a / phi) for a decay rate a that may vanish: a = 0 is taken as the
// limit a -> +0, matching atan(y / +0). The XPM braces are continuous there.
inline double sgn_rate(double a, double phi) { return a == 0.0 ? sgn(phi) : sgn(a / phi); }

// f(a, b) / (a + b) for f with f(a, -a) = 0; the removable singularity at
// a + b = 0 is bridged by averaging two points straddling it, at least
// `min_offset` apart from it.
inline double over_sum(const std::function<double(double, double)>& f, double a, double b, double min_offset) {
  const double s = a + b;
  if (std::abs(s) > 1e-7 * (std::abs(a) + std::abs(b)) && s != 0.0) return f(a, b) / s;
  const double d = std::max(1e-5 * std::abs(b), min_offset);
  const double bp = -a + d, bm = -a - d;
  return 0.5 * (f(a, bp) / (a + bp) + f(a, bm) / (a + bm));
}

}  // namespace closed_detail

/// Closed-form link function mu(f1 + f_i, f2 + f_i, f_i) for phase mismatch phi.
inline double link_function_closed(const ClosedFormTerms& t, double phi, const ClosedFormOptions& opt = {}) {
  const double L = t.span_length;
  const double c = std::cos(phi * L), s = std::sin(phi * L);
  const double sin_sign = opt.sin_term_as_printed ? 1.0 : -1.0;
  double mu = 0.0;
  for (std::size_t p = 0; p < 3; ++p) {
    if (t.upsilon[p] == 0.0) continue;
    for (std::size_t q = 0; q < 3; ++q) {
      if (t.upsilon[q] == 0.0) continue;
      const double a = t.alpha_l[p], b = t.alpha_l[q];
      const double den = (a * a + phi * phi) * (b * b + phi * phi);
      const double kff = t.kappa_f[p] * t.kappa_f[q] + t.kappa_b[p] * t.kappa_b[q];
      const double kfb = t.kappa_f[p] * t.kappa_b[q] + t.kappa_b[p] * t.kappa_f[q];
      const double kdf = t.kappa_f[p] * t.kappa_b[q] - t.kappa_b[p] * t.kappa_f[q];
      const double term = kff * (a * b + phi * phi) / den - kfb * (a * b + phi * phi) / den * c +
                          sin_sign * kdf * (a - b) * phi / den * s;
      mu += t.upsilon[p] * t.upsilon[q] * term;
    }
  }
  return mu;
}

/// Closed-form XPM of interferer k (terms `tk`) on the COI.
inline double eta_xpm_closed(const ClosedFormTerms& tk, double phi_ik, double b_i, double b_k, double p_i, double p_k,
                             double gamma, const ClosedFormOptions& opt = {}) {
  if (phi_ik == 0.0) throw NumericalError("eta_xpm: zero phase mismatch (zero-dispersion resonance)");
  using closed_detail::sgn;
  const double L = tk.span_length, pi = units::kPi;
  const double sin_sign = opt.sin_term_as_printed ? 1.0 : -1.0;
  const double y = phi_ik * b_i / 2.0;
  double sum = 0.0;
  for (std::size_t p = 0; p < 3; ++p) {
    if (tk.upsilon[p] == 0.0) continue;
    for (std::size_t q = 0; q < 3; ++q) {
      if (tk.upsilon[q] == 0.0) continue;
      const double kff = tk.kappa_f[p] * tk.kappa_f[q] + tk.kappa_b[p] * tk.kappa_b[q];
      const double kfb = tk.kappa_f[p] * tk.kappa_b[q] + tk.kappa_b[p] * tk.kappa_f[q];
      const double kdf = tk.kappa_f[p] * tk.kappa_b[q] - tk.kappa_b[p] * tk.kappa_f[q];
      auto braces = [&](double a, double b) {
        // atan(x)/x -> 1 keeps the phi -> 0 limit finite.
        auto at = [&](double al) {
          const double x = y / al;
          return std::abs(x) < 1e-6 ? x : std::atan(x);
        };
        const double ea = std::exp(-std::abs(a * L)), eb = std::exp(-std::abs(b * L));
        const double main = 2.0 * kff * (at(a) + at(b));
        const double osc = pi * (-kfb * (closed_detail::sgn_rate(a, phi_ik) * ea + closed_detail::sgn_rate(b, phi_ik) * eb) +
                                 sin_sign * kdf * (sgn(-phi_ik) * ea + sgn(phi_ik) * eb));
        return main + osc;
      };
      sum += tk.upsilon[p] * tk.upsilon[q] * closed_detail::over_sum(braces, tk.alpha_l[p], tk.alpha_l[q], 1e-6 / L) / phi_ik;
    }
  }
  const double r = p_k / p_i;
  return 32.0 / 27.0 * gamma * gamma / b_k * r * r * sum;
}

/// Closed-form SPM of the COI (terms `ti`).
inline double eta_spm_closed(const ClosedFormTerms& ti, double phi_i, double b_i, double gamma,
                             const ClosedFormOptions& opt = {}) {
  using closed_detail::sgn;
  const double L = ti.span_length, pi = units::kPi;
  if (!(phi_i * L > 0.0) || !(b_i > 0.0))
    throw NumericalError("eta_spm: phi_i L B_i^2 must be > 0 for the logarithmic term; use the integral model");
  const double sin_sign = opt.sin_term_as_printed ? 1.0 : -1.0;
  const double lg = 4.0 * std::log(std::sqrt(phi_i * L / (2.0 * pi)) * b_i);
  const double y = 3.0 * phi_i * b_i * b_i / (8.0 * pi);
  double sum = 0.0;
  for (std::size_t p = 0; p < 3; ++p) {
    if (ti.upsilon[p] == 0.0) continue;
    for (std::size_t q = 0; q < 3; ++q) {
      if (ti.upsilon[q] == 0.0) continue;
      const double kff = ti.kappa_f[p] * ti.kappa_f[q] + ti.kappa_b[p] * ti.kappa_b[q];
      const double kfb = ti.kappa_f[p] * ti.kappa_b[q] + ti.kappa_b[p] * ti.kappa_f[q];
      const double kdf = ti.kappa_f[p] * ti.kappa_b[q] - ti.kappa_b[p] * ti.kappa_f[q];
      auto braces = [&](double a, double b) {
        const double ea = std::exp(-std::abs(a * L)), eb = std::exp(-std::abs(b * L));
        const double main = 2.0 * kff * (std::asinh(y / a) + std::asinh(y / b));
        const double osc = lg * (-kfb * (sgn(a / phi_i) * ea + sgn(b / phi_i) * eb) +
                                 sin_sign * kdf * (sgn(-phi_i) * ea + sgn(phi_i) * eb));
        return main + osc;
      };
      sum += ti.upsilon[p] * ti.upsilon[q] * pi * closed_detail::over_sum(braces, ti.alpha_l[p], ti.alpha_l[q], 1e-6 / L) / phi_i;
    }
  }
  return 16.0 / 27.0 * gamma * gamma / (b_i * b_i) * sum;
}

/// XPM of channel k on channel i of one span.
inline double eta_xpm_pair(const ProfileFit& fit, const SpanConfig& span, std::size_t i, std::size_t k,
                           const ClosedFormOptions& opt = {}) {
  if (i == k) throw InputError("eta_xpm_pair: interferer must differ from the COI");
  const auto& ci = span.channels[i];
  const auto& ck = span.channels[k];
  return eta_xpm_closed(compute_terms(fit, k), phi_xpm(span.fiber, ci.frequency, ck.frequency), ci.bandwidth,
                        ck.bandwidth, ci.power, ck.power, span.fiber.gamma, opt);
}

/// SPM of channel i of one span.
inline double eta_spm(const ProfileFit& fit, const SpanConfig& span, std::size_t i, const ClosedFormOptions& opt = {}) {
  const auto& ci = span.channels[i];
  return eta_spm_closed(compute_terms(fit, i), phi_spm(span.fiber, ci.frequency), ci.bandwidth, span.fiber.gamma, opt);
}

/// Per-channel SPM and total XPM of one span, 1/W^2.
struct SpanNli {
  std::vector<double> eta_spm;
  std::vector<double> eta_xpm;
};

/// Nominal bandwidth assigned to pumps treated as interferers.
inline constexpr double kPumpInterfererBandwidth = 1e9;

/// Closed-form NLI of one span. With `pumps`, every pump fit (profile
/// normalized to its z = 0 power) is added as an interferer.
inline SpanNli closed_span_nli(const SpanConfig& span, const ProfileFit& fit, bool pumps,
                               const ClosedFormOptions& opt = {}) {
  const std::size_t n = span.channels.size();
  if (fit.size() != n) throw InputError("closed form: fit does not match the channel plan");
  if (pumps && fit.pumps.size() != span.pumps.size())
    throw InputError("closed form: pumps as interferers need pump profile fits");
  std::vector<ClosedFormTerms> terms;
  terms.reserve(n);
  for (std::size_t k = 0; k < n; ++k) terms.push_back(compute_terms(fit, k));
  std::vector<ClosedFormTerms> pump_terms;
  if (pumps)
    for (const auto& pf : fit.pumps) pump_terms.push_back(compute_terms(pf, fit.span_length));

  SpanNli out;
  out.eta_spm.resize(n);
  out.eta_xpm.assign(n, 0.0);
  const double g = span.fiber.gamma;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ci = span.channels[i];
    out.eta_spm[i] = eta_spm_closed(terms[i], phi_spm(span.fiber, ci.frequency), ci.bandwidth, g, opt);
    double x = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const auto& ck = span.channels[k];
      x += eta_xpm_closed(terms[k], phi_xpm(span.fiber, ci.frequency, ck.frequency), ci.bandwidth, ck.bandwidth,
                          ci.power, ck.power, g, opt);
    }
    for (std::size_t p = 0; p < pump_terms.size(); ++p)
      x += eta_xpm_closed(pump_terms[p], phi_xpm(span.fiber, ci.frequency, fit.pumps[p].frequency), ci.bandwidth,
                          kPumpInterfererBandwidth, ci.power, fit.pump_launch[p], g, opt);
    out.eta_xpm[i] = x;
  }
  return out;
}

/// One row of the NLI spectrum.
struct NliEntry {
  double frequency = 0.0;
  double eta_spm = 0.0;  // 1/W^2, first span
  double eta_xpm = 0.0;  // 1/W^2, first span
  double eta_n = 0.0;    // 1/W^2, accumulated over the link
  double snr_db = 0.0;
};

struct NliSpectrum {
  std::vector<NliEntry> channels;
  std::string method;  // "closed" or "integral"
  std::size_t num_spans = 0;
  double epsilon = 0.0;

  std::size_t size() const { return channels.size(); }
  const NliEntry& operator[](std::size_t i) const { return channels[i]; }
};

/// Accumulates per-span contributions: SPM coherently (n^epsilon), XPM
/// incoherently, each weighted by (P_ij / P_i)^2, then SNR = 1 / (eta P_i^2).
inline NliSpectrum assemble_spectrum(const LinkPlan& plan, const std::vector<SpanNli>& spans, std::string method) {
  if (spans.size() != plan.num_spans()) throw InputError("eta_total: missing per-span NLI (one per span required)");
  const std::size_t n = plan.num_channels();
  const double ne = std::pow(static_cast<double>(plan.num_spans()), plan.epsilon);
  NliSpectrum out;
  out.method = std::move(method);
  out.num_spans = plan.num_spans();
  out.epsilon = plan.epsilon;
  out.channels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p_i = plan.spans.front().channels[i].power;
    double eta = 0.0;
    for (std::size_t j = 0; j < plan.num_spans(); ++j) {
      const double r = plan.spans[j].channels[i].power / p_i;
      eta += r * r * (spans[j].eta_spm[i] * ne + spans[j].eta_xpm[i]);
    }
    auto& e = out.channels[i];
    e.frequency = plan.spans.front().channels[i].frequency;
    e.eta_spm = spans.front().eta_spm[i];
    e.eta_xpm = spans.front().eta_xpm[i];
    e.eta_n = eta;
    e.snr_db = -10.0 * std::log10(eta * p_i * p_i);
  }
  return out;
}

/// Per-span evaluation shared by both models: identical spans with identical
/// fits are evaluated once. A single fit is reused for every span.
template <class Fit, class Eval>
std::vector<SpanNli> evaluate_spans(const LinkPlan& plan, const std::vector<Fit>& fits, Eval&& eval) {
  plan.validate();
  if (fits.empty() || (fits.size() != 1 && fits.size() != plan.num_spans()))
    throw InputError("eta_total: missing fit for a span (need one per span, or one shared)");
  auto fit_of = [&](std::size_t j) -> const Fit& { return fits.size() == 1 ? fits.front() : fits[j]; };
  std::vector<SpanNli> per;
  per.reserve(plan.num_spans());
  for (std::size_t j = 0; j < plan.num_spans(); ++j) {
    std::size_t same = j;
    for (std::size_t m = 0; m < j && same == j; ++m)
      if (plan.spans[m] == plan.spans[j] && fit_of(m) == fit_of(j)) same = m;
    per.push_back(same != j ? per[same] : eval(plan.spans[j], fit_of(j)));
  }
  return per;
}

/// Closed-form eta_n and SNR_NLI of a link.
inline NliSpectrum eta_total(const LinkPlan& plan, const std::vector<ProfileFit>& fits, const ClosedFormOptions& opt = {}) {
  auto per = evaluate_spans(plan, fits, [&](const SpanConfig& span, const ProfileFit& fit) {
    return closed_span_nli(span, fit, plan.pumps_as_interferers, opt);
  });
  return assemble_spectrum(plan, per, "closed");
}

/// Coherence factor of the GN model for identical spans,
/// eps = 0.3 ln(1 + (6/L) L_ea / asinh(pi^2/2 |beta2| L_ea R^2 N^(2R/df))), L_ea = 1/alpha.
inline double gn_coherence_factor(double alpha, double beta2, double span_length, double symbol_rate, std::size_t n_ch,
                                  double spacing) {
  if (!(alpha > 0.0) || !(span_length > 0.0) || !(symbol_rate > 0.0) || n_ch == 0 || !(spacing > 0.0))
    throw InputError("gn_coherence_factor: parameters must be positive");
  const double lea = 1.0 / alpha;
  const double bw = std::pow(static_cast<double>(n_ch), 2.0 * symbol_rate / spacing);
  const double den = std::asinh(0.5 * units::kPi * units::kPi * std::abs(beta2) * lea * symbol_rate * symbol_rate * bw);
  return 0.3 * std::log(1.0 + 6.0 / span_length * lea / den);
}

/// CSV: one row per channel.
inline void write_nli_csv(std::ostream& os, const NliSpectrum& s) {
  os << "wavelength_nm,eta_spm_1_w2,eta_xpm_1_w2,eta_n_1_w2,snr_nli_db,method\n";
  char buf[256];
  for (const auto& e : s.channels) {
    std::snprintf(buf, sizeof buf, "%.4f,%.9e,%.9e,%.9e,%.6f,%s\n", units::hz_to_nm(e.frequency), e.eta_spm, e.eta_xpm,
                  e.eta_n, e.snr_db, s.method.c_str());
    os << buf;
  }
}

}  // namespace rqot
