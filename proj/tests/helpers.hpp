#pragma once

#include <string>

#include "rqot/rqot.hpp"

namespace rqot::test {

inline std::string source_path(const std::string& rel) { return std::string(RQOT_SOURCE_DIR) + "/" + rel; }

inline LinkPlan scenario(const std::string& name) { return load_scenario(source_path("scenarios/" + name)); }

inline FiberSpec flat_fiber(double alpha_db_km = 0.2, double gain_slope = 0.0, double span_km = 80.0) {
  FiberSpec f;
  f.attenuation = AttenuationCurve::flat(units::db_per_km_to_per_m(alpha_db_km));
  f.raman_gain = gain_slope > 0.0 ? RamanGainCurve::triangular(gain_slope) : RamanGainCurve::zero();
  f.gamma = 1.16e-3;
  f.set_dispersion({16.5, 0.09, 1550.0});
  f.span_length = span_km * 1e3;
  return f;
}

inline SpanConfig toy_span(std::size_t n, double spacing_hz, double power_w, FiberSpec fiber = flat_fiber()) {
  SpanConfig s;
  s.fiber = std::move(fiber);
  s.channels = ChannelPlan::uniform(n, spacing_hz, units::nm_to_hz(1550.0), 96e9, power_w);
  return s;
}

}  // namespace rqot::test
