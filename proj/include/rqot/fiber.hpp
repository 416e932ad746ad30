#pragma once

#include "rqot/curves.hpp"
#include "rqot/units.hpp"

namespace rqot {

/// Chromatic dispersion in boundary units.
struct DispersionDS {
  double d_ps_nm_km;      // D
  double s_ps_nm2_km;     // S
  double ref_wavelength_nm = 1550.0;
};

namespace dispersion {

// D [ps/(nm km)] <-> s/m^2 and S [ps/(nm^2 km)] <-> s/m^3.
inline constexpr double kDToSi = 1e-6;
inline constexpr double kSToSi = 1e3;

inline double beta2_from_d(double d_ps_nm_km, double lambda_m) {
  const double k = lambda_m * lambda_m / (2.0 * units::kPi * units::kSpeedOfLight);
  return -d_ps_nm_km * kDToSi * k;
}

inline double beta3_from_ds(double d_ps_nm_km, double s_ps_nm2_km, double lambda_m) {
  const double k = lambda_m * lambda_m / (2.0 * units::kPi * units::kSpeedOfLight);
  return k * k * (s_ps_nm2_km * kSToSi + 2.0 * d_ps_nm_km * kDToSi / lambda_m);
}

inline double d_from_beta2(double beta2, double lambda_m) {
  const double k = lambda_m * lambda_m / (2.0 * units::kPi * units::kSpeedOfLight);
  return -beta2 / k / kDToSi;
}

inline double s_from_betas(double beta2, double beta3, double lambda_m) {
  const double k = lambda_m * lambda_m / (2.0 * units::kPi * units::kSpeedOfLight);
  const double d_si = -beta2 / k;
  return (beta3 / (k * k) - 2.0 * d_si / lambda_m) / kSToSi;
}

}  // namespace dispersion

/// Fibre physics for one span, internal SI units.
///
/// Dispersion is expanded around `ref_frequency`; every phase-mismatch
/// expression measures frequencies relative to it (see `relative()`).
struct FiberSpec {
  AttenuationCurve attenuation;
  RamanGainCurve raman_gain;
  double gamma = 0.0;           // 1/(W m)
  double beta2 = 0.0;           // s^2/m
  double beta3 = 0.0;           // s^3/m
  double ref_frequency = units::nm_to_hz(1550.0);  // Hz
  double span_length = 0.0;     // m

  void validate() const {
    if (!(span_length > 0.0)) throw InputError("fiber: span length must be > 0");
    if (!(gamma >= 0.0)) throw InputError("fiber: gamma must be >= 0");
    if (!(ref_frequency > 0.0)) throw InputError("fiber: reference frequency must be > 0");
    if (attenuation.samples().empty()) throw InputError("fiber: attenuation curve missing");
    if (raman_gain.samples().empty()) throw InputError("fiber: raman gain curve missing");
  }

  double alpha(double f_hz) const { return attenuation.at(f_hz); }

  double relative(double f_hz) const { return f_hz - ref_frequency; }

  void set_dispersion(const DispersionDS& ds) {
    const double lambda = ds.ref_wavelength_nm * 1e-9;
    ref_frequency = units::wavelength_to_frequency(lambda);
    beta2 = dispersion::beta2_from_d(ds.d_ps_nm_km, lambda);
    beta3 = dispersion::beta3_from_ds(ds.d_ps_nm_km, ds.s_ps_nm2_km, lambda);
  }

  DispersionDS dispersion_ds() const {
    const double lambda = units::frequency_to_wavelength(ref_frequency);
    return {dispersion::d_from_beta2(beta2, lambda), dispersion::s_from_betas(beta2, beta3, lambda), lambda * 1e9};
  }

  friend bool operator==(const FiberSpec&, const FiberSpec&) = default;
};

/// Standard single-mode fibre without Raman gain: flat 0.2 dB/km,
/// gamma 1.16 1/(W km), D = 16.5 ps/(nm km), S = 0.09 ps/(nm^2 km) at 1550 nm.
inline FiberSpec lumped_ssmf(double span_length = 80e3) {
  FiberSpec f;
  f.attenuation = AttenuationCurve::flat(units::db_per_km_to_per_m(0.2));
  f.raman_gain = RamanGainCurve::zero();
  f.gamma = 1.16e-3;
  f.set_dispersion({16.5, 0.09, 1550.0});
  f.span_length = span_length;
  return f;
}

}  // namespace rqot
