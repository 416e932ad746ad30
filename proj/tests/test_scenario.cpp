#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace rqot;

namespace {

const char* kFiber =
    R"("fiber": {"attenuation_csv": "data/g652d_attenuation.csv", "raman_gain_csv": "data/g652d_raman_gain.csv",
        "gamma": 1.16, "D": 16.5, "S": 0.09, "ref_wavelength_nm": 1550, "span_km": 80})";

LinkPlan parse(const std::string& body) { return parse_scenario("{" + std::string(kFiber) + "," + body + "}", RQOT_SOURCE_DIR); }

}  // namespace

TEST(Scenario, TableForwardScenario) {
  const auto plan = test::scenario("fw.json");
  ASSERT_EQ(plan.num_spans(), 1u);
  const auto& s = plan.spans[0];
  EXPECT_EQ(s.channels.size(), 131u);
  EXPECT_EQ(s.pumps.size(), 10u);
  EXPECT_EQ(s.pumps.count(PumpDirection::Forward), 10u);
  EXPECT_NEAR(units::hz_to_nm(s.pumps.pumps.front().frequency), 1402.1, 1e-9);
  EXPECT_NEAR(s.pumps.pumps.front().power, 0.1509, 1e-15);
  EXPECT_NEAR(units::hz_to_nm(s.pumps.pumps.back().frequency), 1485.4, 1e-9);
  for (const auto& c : s.channels.channels) EXPECT_NEAR(c.power, 0.39810717055e-3, 1e-14);
  EXPECT_NEAR(s.channels.channels.back().frequency - s.channels.channels.front().frequency, 13e12, 1.0);
  EXPECT_NEAR(s.fiber.gamma, 1.16e-3, 1e-18);
  EXPECT_NEAR(s.fiber.span_length, 80e3, 1e-9);
}

TEST(Scenario, SingleChannelNoPumps) {
  const auto plan = parse(R"("channels": {"list": [{"wavelength_nm": 1550, "symbol_rate_gbd": 96, "power_dbm": 0}]})");
  EXPECT_EQ(plan.num_channels(), 1u);
  EXPECT_TRUE(plan.spans[0].pumps.empty());
  EXPECT_DOUBLE_EQ(plan.spans[0].channels[0].power, 1e-3);
}

TEST(Scenario, OverlappingChannelsRejected) {
  try {
    parse(R"("channels": {"count": 3, "spacing_ghz": 50, "center_nm": 1550, "symbol_rate_gbd": 96, "power_dbm": 0})");
    FAIL() << "expected an invariant violation";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("overlapping"), std::string::npos);
  }
}

TEST(Scenario, ParseErrorCarriesLocation) {
  try {
    parse_scenario("{\n  \"fiber\": {,\n}", ".");
    FAIL() << "expected a parse error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Scenario, MissingFieldNamed) {
  try {
    parse(R"("channels": {"count": 3, "center_nm": 1550, "symbol_rate_gbd": 96, "power_dbm": 0})");
    FAIL() << "expected a missing-field error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("spacing_ghz"), std::string::npos) << e.what();
  }
}

TEST(Scenario, InvalidPumpsRejected) {
  const std::string ch = R"("channels": {"count": 3, "spacing_ghz": 100, "center_nm": 1550, "symbol_rate_gbd": 96, "power_dbm": 0})";
  EXPECT_THROW(parse(ch + R"(, "pumps": [{"wavelength_nm": 1450, "direction": "UP", "power_mw": 10}])"), InputError);
  EXPECT_THROW(parse(ch + R"(, "pumps": [{"wavelength_nm": 1450, "direction": "FW", "power_mw": 0}])"), InputError);
  EXPECT_THROW(parse(ch + R"(, "pumps": [{"wavelength_nm": 1550, "direction": "FW", "power_mw": 10}])"), InputError);
  EXPECT_THROW(parse(ch + R"(, "link": {"epsilon": -0.1})"), InputError);
}

TEST(Scenario, MultiSpanShorthandAndEpsilon) {
  const auto plan = parse(
      R"("channels": {"count": 3, "spacing_ghz": 100, "center_nm": 1550, "symbol_rate_gbd": 96, "power_dbm": 0},
         "link": {"num_spans": 4, "epsilon": 0.05, "pump_interferers": true})");
  EXPECT_EQ(plan.num_spans(), 4u);
  EXPECT_DOUBLE_EQ(plan.epsilon, 0.05);
  EXPECT_TRUE(plan.pumps_as_interferers);
  EXPECT_EQ(plan.spans[0], plan.spans[3]);
}

TEST(Scenario, HeterogeneousSpansMustShareChannels) {
  auto plan = test::scenario("cband_toy.json");
  plan.spans.push_back(plan.spans[0]);
  plan.spans[1].channels.channels[0].power *= 2.0;
  EXPECT_NO_THROW(plan.validate());
  plan.spans[1].channels.channels[0].frequency += 1e9;
  EXPECT_THROW(plan.validate(), InputError);
}

TEST(Scenario, ReserializeRoundTripIsIdentical) {
  for (const char* name : {"fw.json", "bw.json", "fwbw.json", "cband_toy.json", "isrs_only.json"}) {
    const auto plan = test::scenario(name);
    const auto text = serialize_scenario(plan);
    const auto again = parse_scenario(text);
    EXPECT_EQ(plan, again) << name;
    EXPECT_EQ(text, serialize_scenario(again)) << name;
  }
}

TEST(Scenario, LoadingIsDeterministic) {
  EXPECT_EQ(test::scenario("fwbw.json"), test::scenario("fwbw.json"));
}

TEST(Scenario, ChannelsSortedAndPumpOrderPreserved) {
  const auto plan = test::scenario("fwbw.json");
  const auto& s = plan.spans[0];
  for (std::size_t i = 1; i < s.channels.size(); ++i) EXPECT_GT(s.channels[i].frequency, s.channels[i - 1].frequency);
  const auto again = parse_scenario(serialize_scenario(plan));
  for (std::size_t p = 0; p < s.pumps.size(); ++p) EXPECT_EQ(s.pumps.pumps[p], again.spans[0].pumps.pumps[p]);
}
