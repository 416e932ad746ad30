#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include <fftw3.h>

#include "rqot/closed_form.hpp"
#include "rqot/quadrature.hpp"

namespace rqot {

struct QuadratureSettings {
  std::size_t grid_points = 201;  // f2 axis of the XPM integral (Simpson)
  double rel_tol = 1e-7;          // adaptive SPM outer axis
  bool pi_window = true;          // apply the rectangular window on f1 + f2
  bool use_raw_profile = false;   // integrate the solver profile instead of the fit
  std::size_t fit_samples = 2001; // z samples of a fitted profile
  std::size_t oversample = 32;    // tabulation points per oscillation period 2 pi / L

  void validate() const {
    if (grid_points < 3 || grid_points % 2 == 0) throw InputError("quadrature: grid_points must be odd and >= 3");
    if (!(rel_tol > 0.0)) throw InputError("quadrature: rel_tol must be > 0");
    if (fit_samples < 3) throw InputError("quadrature: fit_samples must be >= 3");
    if (oversample < 4) throw InputError("quadrature: oversample must be >= 4");
  }
};

/// Normalized power profiles rho(z) of every NLI source: channels first, then pumps.
struct RhoSource {
  double span_length = 0.0;
  std::size_t num_channels = 0;
  std::vector<double> frequency;
  std::vector<double> bandwidth;
  std::vector<double> power;                 // W at z = 0
  std::vector<std::vector<double>> samples;  // uniform grid over [0, L], rho(0) = 1
  std::vector<double> slope0, slope_l;       // d rho / dz at both ends
  std::vector<ChannelFit> fits;              // analytic profiles; empty for solver profiles

  std::size_t size() const { return frequency.size(); }

  double rho(std::size_t e, double z) const {
    if (!fits.empty()) {
      const auto& c = fits[e];
      return fit_detail::rho(c.alpha, c.alpha_f, c.alpha_b, c.u_f, c.u_b, z, span_length);
    }
    const auto& s = samples[e];
    const double x = std::clamp(z / span_length, 0.0, 1.0) * static_cast<double>(s.size() - 1);
    const std::size_t k = std::min(static_cast<std::size_t>(x), s.size() - 2);
    const double t = x - static_cast<double>(k);
    return s[k] + t * (s[k + 1] - s[k]);
  }

  /// Entity whose band contains f, else the closest one.
  std::size_t nearest(double f) const {
    std::size_t best = 0;
    for (std::size_t e = 1; e < size(); ++e)
      if (std::abs(frequency[e] - f) < std::abs(frequency[best] - f)) best = e;
    return best;
  }

  friend bool operator==(const RhoSource&, const RhoSource&) = default;
};

namespace integral_detail {

inline double fit_slope(const ChannelFit& c, double z, double L) {
  const double e = std::exp(-c.alpha * z);
  const double r = fit_detail::rho(c.alpha, c.alpha_f, c.alpha_b, c.u_f, c.u_b, z, L);
  double d = -c.alpha * r - e * c.u_f * std::exp(-c.alpha_f * z);
  if (c.u_b != 0.0) d -= e * c.u_b * std::exp(-c.alpha_b * (L - z));
  return d;
}

inline void add_fit(RhoSource& src, const ChannelFit& c, double bandwidth, double power, std::size_t n) {
  const double L = src.span_length;
  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k)
    s[k] = fit_detail::rho(c.alpha, c.alpha_f, c.alpha_b, c.u_f, c.u_b, L * static_cast<double>(k) / static_cast<double>(n - 1), L);
  src.frequency.push_back(c.frequency);
  src.bandwidth.push_back(bandwidth);
  src.power.push_back(power);
  src.samples.push_back(std::move(s));
  src.slope0.push_back(fit_slope(c, 0.0, L));
  src.slope_l.push_back(fit_slope(c, L, L));
  src.fits.push_back(c);
}

}  // namespace integral_detail

/// Profiles taken from a fit. Pump fits, when present, are appended.
inline RhoSource rho_from_fit(const ProfileFit& fit, const SpanConfig& span, std::size_t samples = 2001) {
  if (fit.size() != span.channels.size()) throw InputError("integral: fit does not match the channel plan");
  if (samples < 3) throw InputError("integral: need at least 3 profile samples");
  RhoSource src;
  src.span_length = fit.span_length;
  src.num_channels = fit.size();
  for (std::size_t i = 0; i < fit.size(); ++i)
    integral_detail::add_fit(src, fit.channels[i], span.channels[i].bandwidth, span.channels[i].power, samples);
  for (std::size_t p = 0; p < fit.pumps.size(); ++p)
    integral_detail::add_fit(src, fit.pumps[p], kPumpInterfererBandwidth, fit.pump_launch[p], samples);
  return src;
}

/// Profiles taken directly from the solver grid (must be uniform).
inline RhoSource rho_from_profile(const PowerProfile& prof, const SpanConfig& span) {
  if (prof.num_channels != span.channels.size()) throw InputError("integral: profile does not match the channel plan");
  const std::size_t n = prof.num_points();
  if (n < 3) throw InputError("integral: profile needs at least 3 points");
  const double L = prof.length(), h = L / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(prof.z[k] - h * static_cast<double>(k)) > 1e-9 * L)
      throw InputError("integral: raw profiles need a uniform z grid");
  RhoSource src;
  src.span_length = L;
  src.num_channels = prof.num_channels;
  for (std::size_t e = 0; e < prof.entities.size(); ++e) {
    auto s = normalized_profile(prof, e);
    for (double v : s)
      if (!(v > 0.0)) throw NumericalError("integral: profile reaches zero power (entity " + std::to_string(e) + ")");
    src.frequency.push_back(prof.entities[e].frequency);
    src.bandwidth.push_back(e < prof.num_channels ? span.channels[e].bandwidth : kPumpInterfererBandwidth);
    src.power.push_back(prof.power(e, 0));
    // second-order one-sided differences
    src.slope0.push_back((-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * h));
    src.slope_l.push_back((3.0 * s[n - 1] - 4.0 * s[n - 2] + s[n - 3]) / (2.0 * h));
    src.samples.push_back(std::move(s));
  }
  return src;
}

/// Link function of one normalized profile, mu(phi) = |int_0^L rho e^{j phi z} dz|^2,
/// with its antiderivative tabulated around phi = 0 and closed asymptotic tails.
///
/// The core uses a piecewise-linear Filon rule whose sums come from one FFT,
/// oversampled so that mu and mu' are known at `oversample` points per
/// period 2 pi / L; the antiderivative between nodes is the integral of the
/// cubic Hermite interpolant. Beyond phi_c the endpoint expansion
/// F ~ (rho_L e^{j phi L} - rho_0)/(j phi) + (rho'_L e^{j phi L} - rho'_0)/phi^2
/// is integrated term by term.
class LinkTable {
 public:
  LinkTable(const std::vector<double>& rho, double L, double slope0, double slope_l, std::size_t oversample = 32)
      : L_(L), rho0_(rho.front()), rhol_(rho.back()), d0_(slope0), dl_(slope_l) {
    const std::size_t n = rho.size();
    if (n < 3) throw InputError("link table: need at least 3 samples");
    const double h = L / static_cast<double>(n - 1);
    std::size_t m = 1;
    while (m < oversample * (n - 1)) m <<= 1;
    step_ = 2.0 * units::kPi / (static_cast<double>(m) * h);
    const double rate = std::max(std::abs(d0_ / rho0_), std::abs(dl_ / rhol_));
    cut_ = std::max(1600.0 / L, 200.0 * rate);
    const std::size_t nodes = static_cast<std::size_t>(std::ceil(cut_ / step_)) + 1;
    cut_ = static_cast<double>(nodes - 1) * step_;

    auto dft = [&](const std::vector<double>& x) {
      std::vector<double> in(m, 0.0);
      std::copy(x.begin(), x.end(), in.begin());
      std::vector<std::complex<double>> out(m / 2 + 1);
      fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                            FFTW_ESTIMATE);
      fftw_execute(plan);
      fftw_destroy_plan(plan);
      return out;
    };
    std::vector<double> zr(n);
    for (std::size_t k = 0; k < n; ++k) zr[k] = h * static_cast<double>(k) * rho[k];
    const auto x0 = dft(rho), x1 = dft(zr);
    // sum_k x_k e^{+j phi_q k h}, using periodicity and real input
    auto sum_at = [&](const std::vector<std::complex<double>>& x, std::size_t q) {
      const std::size_t r = q % m;
      return r <= m / 2 ? std::conj(x[r]) : x[m - r];
    };

    mu_.resize(nodes);
    dmu_.resize(nodes);
    for (std::size_t q = 0; q < nodes; ++q) {
      const double phi = step_ * static_cast<double>(q);
      const auto t0 = sum_at(x0, q), t1 = sum_at(x1, q);
      const auto f = filon(t0, rho.front(), rho.back(), phi, h, n);
      const auto g = filon(t1, zr.front(), zr.back(), phi, h, n);
      const std::complex<double> df = std::complex<double>(0.0, 1.0) * g;
      mu_[q] = std::norm(f);
      dmu_[q] = 2.0 * std::real(std::conj(f) * df);
    }
    c0_.assign(nodes, 0.0);
    c1_.assign(nodes, 0.0);
    for (std::size_t q = 1; q < nodes; ++q) {
      const double a = step_ * static_cast<double>(q - 1), b = a + step_;
      c0_[q] = c0_[q - 1] + step_ / 2.0 * (mu_[q - 1] + mu_[q]) + step_ * step_ / 12.0 * (dmu_[q - 1] - dmu_[q]);
      c1_[q] = c1_[q - 1] + step_ / 2.0 * (a * mu_[q - 1] + b * mu_[q]) +
               step_ * step_ / 12.0 * ((mu_[q - 1] + a * dmu_[q - 1]) - (mu_[q] + b * dmu_[q]));
    }
  }

  double cutoff() const { return cut_; }
  double step() const { return step_; }
  double mu0() const { return mu_.front(); }

  /// mu(phi): Hermite interpolation in the core, endpoint expansion beyond.
  double mu(double phi) const {
    const double p = std::abs(phi);
    if (p > cut_) return asymptotic(p);
    std::size_t q;
    double t;
    locate(p, q, t);
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t), h01 = t * t * (3 - 2 * t),
                 h11 = t * t * (t - 1);
    return h00 * mu_[q] + h10 * step_ * dmu_[q] + h01 * mu_[q + 1] + h11 * step_ * dmu_[q + 1];
  }

  /// Endpoint expansion of mu, valid for |phi| L >> 1.
  double asymptotic(double phi) const {
    const double c = std::cos(phi * L_), s = std::sin(phi * L_);
    const double p2 = phi * phi;
    return (rho0_ * rho0_ + rhol_ * rhol_ - 2.0 * rho0_ * rhol_ * c) / p2 +
           2.0 * (rho0_ * dl_ - rhol_ * d0_) * s / (p2 * phi) +
           (d0_ * d0_ + dl_ * dl_ - 2.0 * d0_ * dl_ * c) / (p2 * p2);
  }

  /// int_pa^pb mu(phi) w(phi) dphi for a smooth weight w, taken linear per panel.
  template <class W>
  double integrate(double pa, double pb, const W& w) const {
    if (pa == pb) return 0.0;
    if (pa > pb) return -integrate(pb, pa, w);
    std::vector<double> cuts = {pa};
    for (double b : {-cut_, 0.0, cut_})
      if (b > pa && b < pb) cuts.push_back(b);
    cuts.push_back(pb);
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double a = cuts[s], b = cuts[s + 1];
      const bool core = std::max(std::abs(a), std::abs(b)) <= cut_ * (1.0 + 1e-12);
      std::vector<double> nodes;
      if (core) {
        for (int k = 0; k <= 4; ++k) nodes.push_back(a + (b - a) * k / 4.0);
      } else {
        // geometric panels, ratio <= 1.5
        const double lo = std::min(std::abs(a), std::abs(b)), hi = std::max(std::abs(a), std::abs(b));
        const int np = std::max(1, static_cast<int>(std::ceil(std::log(hi / lo) / std::log(1.5))));
        const double sg = a < 0.0 ? -1.0 : 1.0;
        for (int k = 0; k <= np; ++k) nodes.push_back(sg * lo * std::pow(hi / lo, static_cast<double>(k) / np));
        if (sg < 0.0) std::reverse(nodes.begin(), nodes.end());
        nodes.front() = a;
        nodes.back() = b;
      }
      for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double x0 = nodes[k], x1 = nodes[k + 1];
        const double wa = w(x0), wb = w(x1);
        const double w1 = (wb - wa) / (x1 - x0), w0 = wa - w1 * x0;
        total += core ? w0 * (c0(x1) - c0(x0)) + w1 * (c1(x1) - c1(x0)) : tail(x0, x1, w0, w1);
      }
    }
    return total;
  }

  /// int_0^phi mu, core only.
  double c0(double phi) const {
    const double p = std::abs(phi);
    std::size_t q;
    double t;
    locate(p, q, t);
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    const double v = c0_[q] + step_ * ((t - t3 + t4 / 2) * mu_[q] + (t2 / 2 - 2 * t3 / 3 + t4 / 4) * step_ * dmu_[q] +
                                       (t3 - t4 / 2) * mu_[q + 1] + (-t3 / 3 + t4 / 4) * step_ * dmu_[q + 1]);
    return phi < 0.0 ? -v : v;
  }

  /// int_0^phi phi' mu(phi') dphi', core only (even in phi).
  double c1(double phi) const {
    const double p = std::abs(phi);
    std::size_t q;
    double t;
    locate(p, q, t);
    const double a = step_ * static_cast<double>(q), b = a + step_;
    const double va = a * mu_[q], vb = b * mu_[q + 1];
    const double da = mu_[q] + a * dmu_[q], db = mu_[q + 1] + b * dmu_[q + 1];
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    return c1_[q] + step_ * ((t - t3 + t4 / 2) * va + (t2 / 2 - 2 * t3 / 3 + t4 / 4) * step_ * da + (t3 - t4 / 2) * vb +
                             (-t3 / 3 + t4 / 4) * step_ * db);
  }

 private:
  static std::complex<double> filon(std::complex<double> total, double first, double last, double phi, double h,
                                    std::size_t n) {
    // F = I0 S0 + E1 S1 with S0 = sum_{k<n-1} x_k e^{j phi k h}, S1 = sum_{k<n-1} x_{k+1} e^{j phi k h}
    const std::complex<double> j(0.0, 1.0);
    const std::complex<double> s0 = total - last * std::exp(j * (phi * h * static_cast<double>(n - 1)));
    const std::complex<double> s1 = std::exp(-j * (phi * h)) * (total - first);
    std::complex<double> i0, e1;
    const std::complex<double> ah = j * (phi * h);
    if (std::abs(phi * h) < 1e-2) {
      std::complex<double> pw = 1.0;
      double fact = 1.0;
      for (int k = 0; k < 10; ++k) {
        if (k > 0) {
          pw *= ah;
          fact *= k;
        }
        i0 += pw / (fact * (k + 1) * (k + 2));
        e1 += pw / (fact * (k + 2));
      }
      i0 *= h;
      e1 *= h;
    } else {
      const std::complex<double> a = j * phi, ea = std::exp(ah);
      e1 = ea / a - (ea - 1.0) / (a * a * h);
      i0 = (ea - 1.0) / a - e1;
    }
    return i0 * s0 + e1 * s1;
  }

  void locate(double p, std::size_t& q, double& t) const {
    const double x = p / step_;
    q = std::min(static_cast<std::size_t>(x), mu_.size() - 2);
    t = std::min(x - static_cast<double>(q), 1.0);
  }

  // int_a^b (w0 + w1 phi) mu_asym(phi), a and b of equal sign, |a|, |b| >= cut.
  double tail(double a, double b, double w0, double w1) const {
    auto falling = [](double p, int m) {
      double r = 1.0;
      for (int k = 0; k < m; ++k) r *= p - k;
      return r;
    };
    // m-th derivative of g = w0 phi^-n + w1 phi^(1-n)
    auto g = [&](int n, int m, double x) {
      return w0 * falling(-n, m) * std::pow(x, -n - m) + w1 * falling(1 - n, m) * std::pow(x, 1 - n - m);
    };
    auto prim = [](double p, double x) { return p == -1.0 ? std::log(std::abs(x)) : std::pow(x, p + 1) / (p + 1); };
    auto plain = [&](int n) { return w0 * (prim(-n, b) - prim(-n, a)) + w1 * (prim(1 - n, b) - prim(1 - n, a)); };
    const double L = L_;
    auto cos_int = [&](int n) {
      auto f = [&](double x) {
        const double c = std::cos(L * x), s = std::sin(L * x);
        return s * g(n, 0, x) / L + c * g(n, 1, x) / (L * L) - s * g(n, 2, x) / (L * L * L) -
               c * g(n, 3, x) / (L * L * L * L);
      };
      return f(b) - f(a);
    };
    auto sin_int = [&](int n) {
      auto f = [&](double x) {
        const double c = std::cos(L * x), s = std::sin(L * x);
        return -c * g(n, 0, x) / L + s * g(n, 1, x) / (L * L) + c * g(n, 2, x) / (L * L * L) -
               s * g(n, 3, x) / (L * L * L * L);
      };
      return f(b) - f(a);
    };
    return (rho0_ * rho0_ + rhol_ * rhol_) * plain(2) - 2.0 * rho0_ * rhol_ * cos_int(2) +
           2.0 * (rho0_ * dl_ - rhol_ * d0_) * sin_int(3) + (d0_ * d0_ + dl_ * dl_) * plain(4) -
           2.0 * d0_ * dl_ * cos_int(4);
  }

  double L_, rho0_, rhol_, d0_, dl_;
  double step_ = 0.0, cut_ = 0.0;
  std::vector<double> mu_, dmu_, c0_, c1_;
};

/// Link function for arbitrary (f1, f2) by complex Simpson over z, with rho
/// of each frequency taken from the entity whose band contains it.
inline double link_function_numeric(const RhoSource& src, const FiberSpec& fiber, double f1, double f2, double f_i) {
  const double pi = units::kPi, L = src.span_length;
  const double f3 = f1 + f2 - f_i;
  const double phi =
      -4.0 * pi * pi * (f1 - f_i) * (f2 - f_i) * (fiber.beta2 + pi * fiber.beta3 * (fiber.relative(f1) + fiber.relative(f2)));
  const std::size_t e1 = src.nearest(f1), e2 = src.nearest(f2), e3 = src.nearest(f3), ei = src.nearest(f_i);
  std::size_t n = src.samples.front().size();
  const double periods = std::abs(phi) * L / (2.0 * pi);
  n = std::max(n, static_cast<std::size_t>(std::ceil(20.0 * periods)) + 1);
  if (n % 2 == 0) ++n;
  if (n > (std::size_t{1} << 24)) throw NumericalError("link_function_numeric: oscillation not resolved at maximum refinement");
  const double h = L / static_cast<double>(n - 1);
  std::vector<std::complex<double>> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = h * static_cast<double>(k);
    const double ri = src.rho(ei, z);
    if (!(ri > 0.0)) throw NumericalError("link_function_numeric: rho(f_i) vanishes");
    const double a = std::sqrt(src.rho(e1, z) * src.rho(e2, z) * src.rho(e3, z) / ri);
    y[k] = a * std::exp(std::complex<double>(0.0, phi * z));
  }
  return std::norm(quad::simpson(y, h));
}

/// Numerical XPM and SPM of one span from tabulated link functions.
///
/// The f1 axis is integrated exactly in the phase variable: for fixed f2 the
/// phase is a quadratic in f1, so int mu(phi(f1)) df1 = int mu(phi) / phi'(f1(phi)) dphi.
/// The f2 axis uses composite Simpson (XPM) or adaptive Gauss-Kronrod (SPM,
/// whose phase vanishes at f2 = 0).
class IntegralEngine {
 public:
  IntegralEngine(RhoSource src, FiberSpec fiber, QuadratureSettings s = {})
      : src_(std::move(src)), fiber_(std::move(fiber)), s_(s), tables_(src_.size()) {
    s_.validate();
    if (src_.size() == 0) throw InputError("integral: empty profile source");
  }

  const RhoSource& source() const { return src_; }

  const LinkTable& table(std::size_t e) {
    if (!tables_.at(e))
      tables_[e] = std::make_unique<LinkTable>(src_.samples[e], src_.span_length, src_.slope0[e], src_.slope_l[e],
                                               s_.oversample);
    return *tables_[e];
  }

  /// XPM of entity k on channel i, 1/W^2.
  double eta_xpm(std::size_t i, std::size_t k) {
    if (i == k) throw InputError("eta_xpm_numeric: interferer must differ from the COI");
    const double bi = src_.bandwidth.at(i), bk = src_.bandwidth.at(k);
    const double v = double_integral(i, k, bi, bk, false);
    const double r = src_.power[k] / src_.power[i];
    return 32.0 / 27.0 * fiber_.gamma * fiber_.gamma / (bk * bk) * r * r * v;
  }

  /// SPM of channel i, half the XPM integral with k = i, 1/W^2.
  double eta_spm(std::size_t i) {
    const double bi = src_.bandwidth.at(i);
    const double v = double_integral(i, i, bi, bi, true);
    return 0.5 * 32.0 / 27.0 * fiber_.gamma * fiber_.gamma / (bi * bi) * v;
  }

  SpanNli span_nli(bool pumps) {
    const std::size_t n = src_.num_channels;
    SpanNli out;
    out.eta_spm.resize(n);
    out.eta_xpm.assign(n, 0.0);
    const std::size_t ne = pumps ? src_.size() : n;
    for (std::size_t i = 0; i < n; ++i) out.eta_spm[i] = eta_spm(i);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < ne; ++k)
        if (i != k) out.eta_xpm[i] += eta_xpm(i, k);
    return out;
  }

 private:
  double double_integral(std::size_t i, std::size_t k, double bi, double bk, bool self) {
    const LinkTable& tab = table(k);
    const double pi = units::kPi;
    const double df = src_.frequency[k] - src_.frequency[i];
    const double s0 = fiber_.relative(src_.frequency[i]) + fiber_.relative(src_.frequency[k]);
    const bool win = s_.pi_window;

    auto line = [&](double f2) {
      double lo = -bi / 2.0, hi = bi / 2.0;
      if (win) {
        lo = std::max(lo, -bk / 2.0 - f2);
        hi = std::min(hi, bk / 2.0 - f2);
      }
      if (!(hi > lo)) return 0.0;
      const double d = f2 + df;
      const double a = -4.0 * pi * pi * d * (fiber_.beta2 + pi * fiber_.beta3 * (s0 + f2));
      const double b = -4.0 * pi * pi * d * pi * fiber_.beta3;
      const double pa = a * lo + b * lo * lo, pb = a * hi + b * hi * hi;
      if (std::max(std::abs(pa), std::abs(pb)) < 1e-3 * tab.step()) return tab.mu0() * (hi - lo);
      if ((a + 2.0 * b * lo) * (a + 2.0 * b * hi) <= 0.0)
        throw NumericalError("integral: phase mismatch not monotonic over the channel band");
      const double sg = a > 0.0 ? 1.0 : -1.0;
      auto w = [&](double phi) { return sg / std::sqrt(a * a + 4.0 * b * phi); };
      return tab.integrate(pa, pb, w);
    };

    if (self) {
      double v = 0.0;
      for (auto [a, b] : {std::pair{-bk / 2.0, 0.0}, std::pair{0.0, bk / 2.0}})
        v += quad::adaptive(line, a, b, s_.rel_tol, 40);
      return v;
    }
    std::vector<double> cuts = {-bk / 2.0};
    if (win)
      for (double c : {-(bk - bi) / 2.0, (bk - bi) / 2.0})
        if (c > cuts.back() + 1e-9 * bk && c < bk / 2.0 - 1e-9 * bk) cuts.push_back(c);
    cuts.push_back(bk / 2.0);
    double v = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double frac = (cuts[s + 1] - cuts[s]) / bk;
      std::size_t n = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(s_.grid_points - 1) / 2.0)) * 2 + 1;
      n = std::max<std::size_t>(n, 3);
      v += quad::simpson(line, cuts[s], cuts[s + 1], n);
    }
    return v;
  }

  RhoSource src_;
  FiberSpec fiber_;
  QuadratureSettings s_;
  std::vector<std::unique_ptr<LinkTable>> tables_;
};

inline double eta_xpm_numeric(const RhoSource& src, const FiberSpec& fiber, std::size_t i, std::size_t k,
                              const QuadratureSettings& s = {}) {
  IntegralEngine e(src, fiber, s);
  return e.eta_xpm(i, k);
}

inline double eta_spm_numeric(const RhoSource& src, const FiberSpec& fiber, std::size_t i, const QuadratureSettings& s = {}) {
  IntegralEngine e(src, fiber, s);
  return e.eta_spm(i);
}

/// Integral-model eta_n and SNR_NLI of a link; one profile source per span, or one shared.
inline NliSpectrum eta_total_integral(const LinkPlan& plan, const std::vector<RhoSource>& sources,
                                      const QuadratureSettings& s = {}) {
  auto per = evaluate_spans(plan, sources, [&](const SpanConfig& span, const RhoSource& src) {
    if (plan.pumps_as_interferers && src.size() == src.num_channels && !span.pumps.empty())
      throw InputError("integral: pumps as interferers need pump profiles in the source");
    IntegralEngine e(src, span.fiber, s);
    return e.span_nli(plan.pumps_as_interferers);
  });
  return assemble_spectrum(plan, per, "integral");
}

}  // namespace rqot
