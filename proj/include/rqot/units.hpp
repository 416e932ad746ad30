#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rqot {

// Errors caused by user input (bad files, violated invariants). CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Errors raised by a numerical procedure (step underflow, non-convergence,
// degenerate closed-form terms). CLI exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace units {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;

// dB/km -> 1/m power attenuation coefficient.
inline constexpr double kDbPerKmToPerM = std::numbers::ln10 / 10.0 / 1000.0;

inline double dbm_to_watt(double p_dbm) {
  if (!std::isfinite(p_dbm)) throw InputError("dbm_to_watt: non-finite power");
  return std::pow(10.0, (p_dbm - 30.0) / 10.0);
}

inline double watt_to_dbm(double p_w) {
  if (!(p_w > 0.0) || !std::isfinite(p_w))
    throw InputError("watt_to_dbm: power must be positive and finite, got " + std::to_string(p_w));
  return 10.0 * std::log10(p_w) + 30.0;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

inline double wavelength_to_frequency(double lambda_m) {
  if (!(lambda_m > 0.0)) throw InputError("wavelength must be positive");
  return kSpeedOfLight / lambda_m;
}

inline double frequency_to_wavelength(double f_hz) {
  if (!(f_hz > 0.0)) throw InputError("frequency must be positive");
  return kSpeedOfLight / f_hz;
}

inline double nm_to_hz(double lambda_nm) { return wavelength_to_frequency(lambda_nm * 1e-9); }
inline double hz_to_nm(double f_hz) { return frequency_to_wavelength(f_hz) * 1e9; }

inline double db_per_km_to_per_m(double a_db_km) { return a_db_km * kDbPerKmToPerM; }
inline double per_m_to_db_per_km(double a_per_m) { return a_per_m / kDbPerKmToPerM; }

inline double km_to_m(double km) { return km * 1000.0; }
inline double m_to_km(double m) { return m / 1000.0; }

}  // namespace units
}  // namespace rqot
