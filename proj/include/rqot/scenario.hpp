#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rqot/plan.hpp"

namespace rqot {

namespace scenario_detail {

using nlohmann::json;

// JSON field access that reports the dotted path of the offending field.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node at(const char* key) const {
    if (!j_.is_object() || !j_.contains(key)) throw InputError("scenario: missing field '" + sub(key) + "'");
    return Node(j_.at(key), sub(key));
  }

  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  double number() const {
    if (!j_.is_number()) throw InputError("scenario: field '" + path_ + "' must be a number");
    return j_.get<double>();
  }

  double number(const char* key) const { return at(key).number(); }

  std::optional<double> maybe_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return at(key).number();
  }

  std::string string() const {
    if (!j_.is_string()) throw InputError("scenario: field '" + path_ + "' must be a string");
    return j_.get<std::string>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) throw InputError("scenario: field '" + path_ + "' must be true/false");
    return j_.get<bool>();
  }

  std::size_t count() const {
    if (!j_.is_number_integer() || j_.get<long long>() < 0)
      throw InputError("scenario: field '" + path_ + "' must be a non-negative integer");
    return j_.get<std::size_t>();
  }

  std::size_t array_size() const {
    if (!j_.is_array()) throw InputError("scenario: field '" + path_ + "' must be an array");
    return j_.size();
  }

  const std::string& path() const { return path_; }

 private:
  std::string sub(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

inline std::vector<CurveSample> inline_samples(const Node& n) {
  std::vector<CurveSample> out;
  for (std::size_t i = 0, m = n.array_size(); i < m; ++i) {
    Node row = n.at(i);
    if (row.array_size() != 2) throw InputError("scenario: field '" + row.path() + "' must be a [x, y] pair");
    out.push_back({row.at(std::size_t{0}).number(), row.at(std::size_t{1}).number()});
  }
  return out;
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path q(p);
  if (q.is_relative()) q = base / q;
  return q.lexically_normal().string();
}

inline FiberSpec parse_fiber(const Node& n, const std::filesystem::path& base) {
  FiberSpec f;
  if (n.has("attenuation"))
    f.attenuation = AttenuationCurve(inline_samples(n.at("attenuation")));
  else
    f.attenuation = load_attenuation_csv(resolve(base, n.at("attenuation_csv").string()));
  if (n.has("raman_gain"))
    f.raman_gain = RamanGainCurve(inline_samples(n.at("raman_gain")));
  else
    f.raman_gain = load_raman_gain_csv(resolve(base, n.at("raman_gain_csv").string()));

  if (auto g = n.maybe_number("gamma_per_w_m"))
    f.gamma = *g;
  else
    f.gamma = n.number("gamma") / 1000.0;  // 1/(W km)

  if (n.has("beta2_s2_per_m")) {
    f.beta2 = n.number("beta2_s2_per_m");
    f.beta3 = n.maybe_number("beta3_s3_per_m").value_or(0.0);
    if (auto fr = n.maybe_number("ref_frequency_hz"))
      f.ref_frequency = *fr;
    else
      f.ref_frequency = units::nm_to_hz(n.maybe_number("ref_wavelength_nm").value_or(1550.0));
  } else {
    DispersionDS ds{n.number("D"), n.maybe_number("S").value_or(0.0), n.maybe_number("ref_wavelength_nm").value_or(1550.0)};
    f.set_dispersion(ds);
  }

  if (auto L = n.maybe_number("span_m"))
    f.span_length = *L;
  else
    f.span_length = units::km_to_m(n.number("span_km"));
  return f;
}

inline Channel parse_channel(const Node& n) {
  Channel c{};
  if (auto f = n.maybe_number("frequency_hz"))
    c.frequency = *f;
  else
    c.frequency = units::nm_to_hz(n.number("wavelength_nm"));
  if (auto b = n.maybe_number("bandwidth_hz"))
    c.bandwidth = *b;
  else
    c.bandwidth = n.number("symbol_rate_gbd") * 1e9;
  if (auto p = n.maybe_number("power_w"))
    c.power = *p;
  else
    c.power = units::dbm_to_watt(n.number("power_dbm"));
  return c;
}

inline ChannelPlan parse_channels(const Node& n) {
  ChannelPlan plan;
  if (n.has("list")) {
    Node list = n.at("list");
    for (std::size_t i = 0, m = list.array_size(); i < m; ++i) plan.channels.push_back(parse_channel(list.at(i)));
  } else {
    const std::size_t count = n.at("count").count();
    if (count == 0) throw InputError("scenario: field 'channels.count' must be >= 1");
    const double spacing = n.number("spacing_ghz") * 1e9;
    const double center = units::nm_to_hz(n.number("center_nm"));
    const double bw = n.number("symbol_rate_gbd") * 1e9;
    const double p = units::dbm_to_watt(n.number("power_dbm"));
    plan = ChannelPlan::uniform(count, spacing, center, bw, p);
  }
  return plan;
}

inline PumpDirection parse_direction(const Node& n) {
  std::string s = n.string();
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (s == "FW" || s == "FORWARD") return PumpDirection::Forward;
  if (s == "BW" || s == "BACKWARD") return PumpDirection::Backward;
  throw InputError("scenario: field '" + n.path() + "' must be \"FW\" or \"BW\"");
}

inline PumpSet parse_pumps(const Node& n) {
  PumpSet set;
  for (std::size_t i = 0, m = n.array_size(); i < m; ++i) {
    Node p = n.at(i);
    Pump pump{};
    if (auto f = p.maybe_number("frequency_hz"))
      pump.frequency = *f;
    else
      pump.frequency = units::nm_to_hz(p.number("wavelength_nm"));
    pump.direction = parse_direction(p.at("direction"));
    if (auto w = p.maybe_number("power_w"))
      pump.power = *w;
    else
      pump.power = p.number("power_mw") * 1e-3;
    set.pumps.push_back(pump);
  }
  return set;
}

inline SpanConfig parse_span(const Node& n, const std::filesystem::path& base) {
  SpanConfig s;
  s.fiber = parse_fiber(n.at("fiber"), base);
  s.channels = parse_channels(n.at("channels"));
  if (n.has("pumps")) s.pumps = parse_pumps(n.at("pumps"));
  return s;
}

inline std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline json samples_json(const std::vector<CurveSample>& s) {
  json a = json::array();
  for (const auto& x : s) a.push_back({x.x, x.y});
  return a;
}

inline json span_json(const SpanConfig& s) {
  json fiber = {
      {"attenuation", samples_json(s.fiber.attenuation.samples())},
      {"raman_gain", samples_json(s.fiber.raman_gain.samples())},
      {"gamma_per_w_m", s.fiber.gamma},
      {"beta2_s2_per_m", s.fiber.beta2},
      {"beta3_s3_per_m", s.fiber.beta3},
      {"ref_frequency_hz", s.fiber.ref_frequency},
      {"span_m", s.fiber.span_length},
  };
  json list = json::array();
  for (const auto& c : s.channels.channels)
    list.push_back({{"frequency_hz", c.frequency}, {"bandwidth_hz", c.bandwidth}, {"power_w", c.power}});
  json pumps = json::array();
  for (const auto& p : s.pumps.pumps)
    pumps.push_back({{"frequency_hz", p.frequency}, {"direction", to_string(p.direction)}, {"power_w", p.power}});
  return {{"fiber", fiber}, {"channels", {{"list", list}}}, {"pumps", pumps}};
}

}  // namespace scenario_detail

/// Parses a scenario document. `base_dir` resolves relative curve paths.
inline LinkPlan parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".") {
  using scenario_detail::json;
  using scenario_detail::Node;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("scenario: parse error at " + scenario_detail::location(text, e.byte == 0 ? 0 : e.byte - 1) +
                     ": " + e.what());
  }
  Node root(doc, "");
  if (!doc.is_object()) throw InputError("scenario: top level must be a JSON object");

  LinkPlan plan;
  if (root.has("link")) {
    Node link = root.at("link");
    plan.epsilon = link.maybe_number("epsilon").value_or(0.0);
    if (link.has("pump_interferers")) plan.pumps_as_interferers = link.at("pump_interferers").boolean();
  }

  if (root.has("spans")) {
    Node spans = root.at("spans");
    for (std::size_t j = 0, m = spans.array_size(); j < m; ++j)
      plan.spans.push_back(scenario_detail::parse_span(spans.at(j), base_dir));
  } else {
    SpanConfig span = scenario_detail::parse_span(root, base_dir);
    std::size_t n = 1;
    if (root.has("link") && root.at("link").has("num_spans")) n = root.at("link").at("num_spans").count();
    if (n == 0) throw InputError("scenario: field 'link.num_spans' must be >= 1");
    plan.spans.assign(n, span);
  }
  plan.validate();
  return plan;
}

inline LinkPlan load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), std::filesystem::path(path).parent_path());
}

/// Serializes in internal SI units with inline curves; reloading yields an identical plan.
inline std::string serialize_scenario(const LinkPlan& plan) {
  using scenario_detail::json;
  json spans = json::array();
  for (const auto& s : plan.spans) spans.push_back(scenario_detail::span_json(s));
  json doc = {{"link", {{"num_spans", plan.spans.size()}, {"epsilon", plan.epsilon}, {"pump_interferers", plan.pumps_as_interferers}}},
              {"spans", spans}};
  return doc.dump(1);
}

}  // namespace rqot
