#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "rqot/fiber.hpp"

namespace rqot {

struct Channel {
  double frequency;  // Hz, center
  double bandwidth;  // Hz, equal to the symbol rate
  double power;      // W, launch power

  friend bool operator==(const Channel&, const Channel&) = default;
};

/// WDM grid: channels sorted by frequency and non-overlapping.
struct ChannelPlan {
  std::vector<Channel> channels;

  std::size_t size() const { return channels.size(); }
  bool empty() const { return channels.empty(); }
  const Channel& operator[](std::size_t i) const { return channels[i]; }

  double total_power() const {
    double p = 0.0;
    for (const auto& c : channels) p += c.power;
    return p;
  }

  void validate() const {
    for (std::size_t i = 0; i < channels.size(); ++i) {
      const auto& c = channels[i];
      if (!(c.frequency > 0.0)) throw InputError("channels: frequency must be > 0 (channel " + std::to_string(i) + ")");
      if (!(c.bandwidth > 0.0)) throw InputError("channels: bandwidth B_i must be > 0 (channel " + std::to_string(i) + ")");
      if (!(c.power > 0.0)) throw InputError("channels: launch power P_i must be > 0 (channel " + std::to_string(i) + ")");
      if (i > 0) {
        const auto& p = channels[i - 1];
        if (!(c.frequency > p.frequency))
          throw InputError("channels: must be sorted by increasing frequency (channel " + std::to_string(i) + ")");
        if (c.frequency - p.frequency < 0.5 * (c.bandwidth + p.bandwidth) * (1.0 - 1e-12)) {
          std::ostringstream os;
          os << "channels: overlapping channels " << i - 1 << " and " << i
             << " violate f_{i+1} - f_i >= (B_i + B_{i+1})/2";
          throw InputError(os.str());
        }
      }
    }
  }

  /// Uniform grid centered on `center_hz`; channels are returned sorted by frequency.
  static ChannelPlan uniform(std::size_t count, double spacing_hz, double center_hz, double bandwidth_hz,
                             double power_w) {
    ChannelPlan plan;
    plan.channels.reserve(count);
    const double first = center_hz - 0.5 * static_cast<double>(count - 1) * spacing_hz;
    for (std::size_t i = 0; i < count; ++i)
      plan.channels.push_back({first + static_cast<double>(i) * spacing_hz, bandwidth_hz, power_w});
    return plan;
  }

  friend bool operator==(const ChannelPlan&, const ChannelPlan&) = default;
};

enum class PumpDirection { Forward, Backward };

inline const char* to_string(PumpDirection d) { return d == PumpDirection::Forward ? "FW" : "BW"; }

struct Pump {
  double frequency;         // Hz
  PumpDirection direction;
  double power;             // W; at z = 0 for FW pumps, at z = L for BW pumps

  friend bool operator==(const Pump&, const Pump&) = default;
};

struct PumpSet {
  std::vector<Pump> pumps;

  std::size_t size() const { return pumps.size(); }
  bool empty() const { return pumps.empty(); }

  std::size_t count(PumpDirection d) const {
    return static_cast<std::size_t>(std::count_if(pumps.begin(), pumps.end(), [d](const Pump& p) { return p.direction == d; }));
  }

  double total_power(PumpDirection d) const {
    double s = 0.0;
    for (const auto& p : pumps)
      if (p.direction == d) s += p.power;
    return s;
  }

  double total_power() const { return total_power(PumpDirection::Forward) + total_power(PumpDirection::Backward); }

  /// Unweighted mean frequency over all pumps, 0 when there are none.
  double mean_frequency() const {
    if (pumps.empty()) return 0.0;
    double s = 0.0;
    for (const auto& p : pumps) s += p.frequency;
    return s / static_cast<double>(pumps.size());
  }

  void validate() const {
    for (std::size_t i = 0; i < pumps.size(); ++i) {
      if (!(pumps[i].power > 0.0)) throw InputError("pumps: boundary power must be > 0 (pump " + std::to_string(i) + ")");
      if (!(pumps[i].frequency > 0.0)) throw InputError("pumps: frequency must be > 0 (pump " + std::to_string(i) + ")");
    }
  }

  friend bool operator==(const PumpSet&, const PumpSet&) = default;
};

/// Everything the Raman solver needs for one span.
struct SpanConfig {
  FiberSpec fiber;
  ChannelPlan channels;
  PumpSet pumps;

  void validate() const {
    fiber.validate();
    channels.validate();
    pumps.validate();
    for (std::size_t p = 0; p < pumps.size(); ++p)
      for (const auto& c : channels.channels)
        if (std::abs(pumps.pumps[p].frequency - c.frequency) < 0.5 * c.bandwidth)
          throw InputError("pumps: pump " + std::to_string(p) + " coincides with a channel frequency");
  }

  friend bool operator==(const SpanConfig&, const SpanConfig&) = default;
};

struct LinkPlan {
  std::vector<SpanConfig> spans;
  double epsilon = 0.0;
  bool pumps_as_interferers = false;

  std::size_t num_spans() const { return spans.size(); }
  std::size_t num_channels() const { return spans.empty() ? 0 : spans.front().channels.size(); }

  void validate() const {
    if (spans.empty()) throw InputError("link: at least one span required");
    if (!(epsilon >= 0.0)) throw InputError("link: coherence factor epsilon must be >= 0");
    for (const auto& s : spans) s.validate();
    const auto& ref = spans.front().channels.channels;
    for (std::size_t j = 1; j < spans.size(); ++j) {
      const auto& ch = spans[j].channels.channels;
      if (ch.size() != ref.size())
        throw InputError("link: every span must carry the same channel count (span " + std::to_string(j) + ")");
      for (std::size_t i = 0; i < ch.size(); ++i)
        if (ch[i].frequency != ref[i].frequency || ch[i].bandwidth != ref[i].bandwidth)
          throw InputError("link: every span must carry the same channel frequencies (span " + std::to_string(j) + ")");
    }
  }

  /// n identical spans built from one configuration.
  static LinkPlan uniform(const SpanConfig& span, std::size_t n, double epsilon = 0.0, bool pumps_as_interferers = false) {
    LinkPlan plan;
    plan.spans.assign(n, span);
    plan.epsilon = epsilon;
    plan.pumps_as_interferers = pumps_as_interferers;
    return plan;
  }

  friend bool operator==(const LinkPlan&, const LinkPlan&) = default;
};

}  // namespace rqot
