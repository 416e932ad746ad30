#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rqot/units.hpp"

namespace rqot {

struct CurveSample {
  double x;
  double y;
};

namespace detail {

// Piecewise-linear interpolation over strictly increasing abscissae.
// Exact at sample points; throws outside [front.x, back.x].
inline double interpolate(const std::vector<CurveSample>& s, double x, const char* what) {
  if (s.empty()) throw InputError(std::string(what) + ": empty curve");
  if (x < s.front().x || x > s.back().x) {
    std::ostringstream os;
    os << what << ": query " << x << " outside sampled range [" << s.front().x << ", " << s.back().x << "]";
    throw InputError(os.str());
  }
  auto it = std::lower_bound(s.begin(), s.end(), x, [](const CurveSample& a, double v) { return a.x < v; });
  if (it->x == x) return it->y;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (x - lo.x) / (hi.x - lo.x);
  return lo.y + t * (hi.y - lo.y);
}

inline void require_strictly_increasing(const std::vector<CurveSample>& s, const char* what) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i].x > s[i - 1].x))
      throw InputError(std::string(what) + ": samples must be strictly increasing (index " + std::to_string(i) + ")");
}

}  // namespace detail

/// Power attenuation coefficient versus absolute optical frequency.
/// Samples are (frequency [Hz], alpha [1/m]), sorted by frequency.
class AttenuationCurve {
 public:
  AttenuationCurve() = default;

  explicit AttenuationCurve(std::vector<CurveSample> samples) : samples_(std::move(samples)) {
    if (samples_.size() < 2) throw InputError("attenuation curve: need at least two samples");
    detail::require_strictly_increasing(samples_, "attenuation curve");
    for (const auto& s : samples_)
      if (!(s.y > 0.0)) throw InputError("attenuation curve: alpha must be > 0 at every sample");
  }

  double at(double f_hz) const { return detail::interpolate(samples_, f_hz, "attenuation curve"); }

  bool covers(double f_hz) const { return f_hz >= samples_.front().x && f_hz <= samples_.back().x; }

  const std::vector<CurveSample>& samples() const { return samples_; }

  /// Constant alpha over [f_lo, f_hi]; handy for tests and toy scenarios.
  static AttenuationCurve flat(double alpha_per_m, double f_lo = 150e12, double f_hi = 250e12) {
    return AttenuationCurve({{f_lo, alpha_per_m}, {f_hi, alpha_per_m}});
  }

  friend bool operator==(const AttenuationCurve& a, const AttenuationCurve& b) {
    return std::equal(a.samples_.begin(), a.samples_.end(), b.samples_.begin(), b.samples_.end(),
                      [](const CurveSample& p, const CurveSample& q) { return p.x == q.x && p.y == q.y; });
  }

 private:
  std::vector<CurveSample> samples_;
};

/// Raman gain normalized by the effective area, g_r(df) in 1/(m W),
/// sampled on df >= 0 [Hz] with g_r(0) = 0.
class RamanGainCurve {
 public:
  static constexpr double kMinSpan = 26e12;

  RamanGainCurve() = default;

  explicit RamanGainCurve(std::vector<CurveSample> samples) : samples_(std::move(samples)) {
    if (samples_.size() < 2) throw InputError("raman gain curve: need at least two samples");
    detail::require_strictly_increasing(samples_, "raman gain curve");
    if (samples_.front().x != 0.0 || samples_.front().y != 0.0)
      throw InputError("raman gain curve: must start at g_r(0) = 0");
    for (const auto& s : samples_)
      if (s.y < 0.0) throw InputError("raman gain curve: gain must be >= 0");
    if (samples_.back().x < kMinSpan) throw InputError("raman gain curve: must cover at least 26 THz");
  }

  double at(double delta_f_hz) const {
    return detail::interpolate(samples_, std::abs(delta_f_hz), "raman gain curve");
  }

  double max_delta_f() const { return samples_.back().x; }

  const std::vector<CurveSample>& samples() const { return samples_; }

  /// Least-squares slope through the origin over [0, upto]: g_r(df) ~ slope * df.
  double triangular_slope(double upto_hz = 15e12) const {
    double num = 0.0, den = 0.0;
    for (const auto& s : samples_) {
      if (s.x > upto_hz) break;
      num += s.x * s.y;
      den += s.x * s.x;
    }
    return den > 0.0 ? num / den : 0.0;
  }

  /// Identically zero gain over [0, span].
  static RamanGainCurve zero(double span_hz = 40e12) { return RamanGainCurve({{0.0, 0.0}, {span_hz, 0.0}}); }

  /// Triangular gain g = slope*df up to peak_df, then zero by 2*peak_df (toy use).
  static RamanGainCurve triangular(double slope, double peak_df = 13e12, double span_hz = 40e12) {
    return RamanGainCurve({{0.0, 0.0}, {peak_df, slope * peak_df}, {2.0 * peak_df, 0.0}, {span_hz, 0.0}});
  }

  friend bool operator==(const RamanGainCurve& a, const RamanGainCurve& b) {
    return std::equal(a.samples_.begin(), a.samples_.end(), b.samples_.begin(), b.samples_.end(),
                      [](const CurveSample& p, const CurveSample& q) { return p.x == q.x && p.y == q.y; });
  }

 private:
  std::vector<CurveSample> samples_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Reads a two-column CSV with the given header; returns raw (col0, col1) rows.
inline std::vector<CurveSample> read_two_column_csv(const std::string& path, const std::string& col0,
                                                    const std::string& col1) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open curve file '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  std::vector<CurveSample> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InputError(path + ":" + std::to_string(lineno) + ": expected two comma-separated columns");
    std::string a = trim(line.substr(0, comma));
    std::string b = trim(line.substr(comma + 1));
    if (!header_seen) {
      if (a != col0 || b != col1)
        throw InputError(path + ":" + std::to_string(lineno) + ": expected header '" + col0 + "," + col1 + "'");
      header_seen = true;
      continue;
    }
    try {
      std::size_t pa = 0, pb = 0;
      double x = std::stod(a, &pa);
      double y = std::stod(b, &pb);
      if (pa != a.size() || pb != b.size()) throw std::invalid_argument("trailing characters");
      rows.push_back({x, y});
    } catch (const std::exception&) {
      throw InputError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  if (!header_seen) throw InputError(path + ": missing header row");
  return rows;
}

}  // namespace detail

/// Loads `wavelength_nm,alpha_db_km` and converts to (Hz, 1/m), sorted by frequency.
inline AttenuationCurve load_attenuation_csv(const std::string& path) {
  auto rows = detail::read_two_column_csv(path, "wavelength_nm", "alpha_db_km");
  std::vector<CurveSample> s;
  s.reserve(rows.size());
  for (const auto& r : rows) s.push_back({units::nm_to_hz(r.x), units::db_per_km_to_per_m(r.y)});
  std::sort(s.begin(), s.end(), [](const CurveSample& a, const CurveSample& b) { return a.x < b.x; });
  return AttenuationCurve(std::move(s));
}

/// Loads `delta_f_thz,gain_1_km_w` and converts to (Hz, 1/(m W)).
inline RamanGainCurve load_raman_gain_csv(const std::string& path) {
  auto rows = detail::read_two_column_csv(path, "delta_f_thz", "gain_1_km_w");
  for (auto& r : rows) {
    r.x *= 1e12;
    r.y *= 1e-3;
  }
  return RamanGainCurve(std::move(rows));
}

}  // namespace rqot
