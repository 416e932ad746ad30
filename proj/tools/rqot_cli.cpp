#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rqot/rqot.hpp"

namespace fs = std::filesystem;
using namespace rqot;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Common {
  std::string scenario;
  std::string out = "out";
  std::uint64_t seed = 1;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write '" + path.string() + "'");
  return os;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

void write_manifest(const fs::path& dir, const std::string& command, const Common& c, const nlohmann::json& overrides) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char ts[32];
  std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  nlohmann::json m = {{"tool", "rqot"},       {"version", kVersion}, {"timestamp", ts},
                      {"command", command},   {"scenario", c.scenario}, {"out", c.out},
                      {"seed", c.seed},       {"overrides", overrides}};
  auto os = open_out(dir / "manifest.json");
  os << m.dump(2) << "\n";
}

LinkPlan load(const Common& c) {
  if (c.scenario.empty()) throw InputError("--scenario is required");
  return load_scenario(c.scenario);
}

std::vector<std::size_t> parse_spans(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      const long v = std::stol(tok, &pos);
      if (pos != tok.size() || v < 1) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InputError("--spans: expected a comma-separated list of positive integers, got '" + s + "'");
    }
  }
  if (out.empty()) throw InputError("--spans: empty list");
  return out;
}

int cmd_profile(const Common& c) {
  const LinkPlan plan = load(c);
  const fs::path dir = prepare_out(c.out);
  write_manifest(dir, "profile", c, nlohmann::json::object());
  const SpanConfig& span = plan.spans.front();
  const PowerProfile prof = solve_span(span);
  const ProfileFit fit = fit_all(prof, span);
  {
    auto os = open_out(dir / "profile.csv");
    write_profile_csv(os, prof);
  }
  {
    auto os = open_out(dir / "fit.csv");
    write_fit_csv(os, fit);
  }
  double worst_leff = 0.0, worst_max = 0.0, worst_rms = 0.0;
  std::size_t unconverged = 0;
  for (const auto& ch : fit.channels) {
    worst_leff = std::max(worst_leff, ch.leff_error);
    worst_max = std::max(worst_max, ch.max_residual_db);
    worst_rms = std::max(worst_rms, ch.rms_residual_db);
    unconverged += ch.converged ? 0 : 1;
  }
  std::printf("channels %zu, pumps %zu, bvp iterations %zu\n", span.channels.size(), span.pumps.size(), prof.bvp_iterations);
  std::printf("fit: worst rms %.4f dB, worst max %.4f dB, mean weighted %.4f dB, worst leff error %.3f%%, unconverged %zu\n",
              worst_rms, worst_max, mean_weighted_residual_db(fit, span.channels), 100.0 * worst_leff, unconverged);
  std::printf("wrote %s, %s\n", (dir / "profile.csv").c_str(), (dir / "fit.csv").c_str());
  return 0;
}

struct NliArgs {
  std::string method = "closed";
  std::string spans;
  std::size_t resolution = 201;
  bool pump_interferers = false;
  bool raw_profile = false;
  double epsilon = -1.0;
};

int cmd_nli(const Common& c, const NliArgs& a) {
  LinkPlan plan = load(c);
  if (a.method != "closed" && a.method != "integral" && a.method != "both")
    throw InputError("--method must be closed, integral or both");
  QuadratureSettings qs;
  qs.grid_points = a.resolution;
  qs.use_raw_profile = a.raw_profile;
  qs.validate();
  if (a.pump_interferers) plan.pumps_as_interferers = true;
  if (a.epsilon >= 0.0) plan.epsilon = a.epsilon;
  std::vector<std::size_t> counts = a.spans.empty() ? std::vector<std::size_t>{plan.num_spans()} : parse_spans(a.spans);
  if (!a.spans.empty())
    for (std::size_t j = 1; j < plan.num_spans(); ++j)
      if (!(plan.spans[j] == plan.spans.front()))
        throw InputError("--spans replicates one span; the scenario lists distinct spans");

  const fs::path dir = prepare_out(c.out);
  write_manifest(dir, "nli", c,
                 {{"method", a.method}, {"spans", a.spans}, {"resolution", a.resolution},
                  {"pump_interferers", plan.pumps_as_interferers}, {"raw_profile", a.raw_profile}, {"epsilon", plan.epsilon}});

  // One solve, fit and per-span NLI evaluation per distinct span configuration.
  std::vector<SpanConfig> distinct;
  std::vector<SpanNli> closed_nli, integral_nli;
  const std::size_t base_n = a.spans.empty() ? plan.num_spans() : 1;
  for (std::size_t j = 0; j < base_n; ++j) {
    const SpanConfig& span = plan.spans[j];
    if (std::find(distinct.begin(), distinct.end(), span) != distinct.end()) continue;
    distinct.push_back(span);
    const PowerProfile prof = solve_span(span);
    ProfileFit fit = fit_all(prof, span);
    if (plan.pumps_as_interferers) fit_pumps(fit, prof, span);
    if (a.method != "integral") closed_nli.push_back(closed_span_nli(span, fit, plan.pumps_as_interferers));
    if (a.method != "closed") {
      IntegralEngine eng(a.raw_profile ? rho_from_profile(prof, span) : rho_from_fit(fit, span, qs.fit_samples), span.fiber, qs);
      integral_nli.push_back(eng.span_nli(plan.pumps_as_interferers));
    }
  }

  for (std::size_t n : counts) {
    LinkPlan link = plan;
    if (!a.spans.empty()) link.spans.assign(n, plan.spans.front());
    std::vector<SpanNli> pc, pi;
    for (const auto& span : link.spans) {
      const std::size_t d = static_cast<std::size_t>(std::find(distinct.begin(), distinct.end(), span) - distinct.begin());
      if (!closed_nli.empty()) pc.push_back(closed_nli[d]);
      if (!integral_nli.empty()) pi.push_back(integral_nli[d]);
    }
    NliSpectrum closed, integral;
    const std::string tag = std::to_string(n) + "span";
    if (a.method != "integral") {
      closed = assemble_spectrum(link, pc, "closed");
      auto os = open_out(dir / ("nli_" + tag + "_closed.csv"));
      write_nli_csv(os, closed);
    }
    if (a.method != "closed") {
      integral = assemble_spectrum(link, pi, "integral");
      auto os = open_out(dir / ("nli_" + tag + "_integral.csv"));
      write_nli_csv(os, integral);
    }
    if (a.method == "both") {
      auto os = open_out(dir / ("nli_" + tag + "_delta.csv"));
      os << "wavelength_nm,snr_closed_db,snr_integral_db,delta_db\n";
      double worst = 0.0;
      char buf[128];
      for (std::size_t i = 0; i < closed.size(); ++i) {
        const double d = closed[i].snr_db - integral[i].snr_db;
        worst = std::max(worst, std::abs(d));
        std::snprintf(buf, sizeof buf, "%.4f,%.6f,%.6f,%.6f\n", units::hz_to_nm(closed[i].frequency), closed[i].snr_db,
                      integral[i].snr_db, d);
        os << buf;
      }
      std::printf("%zu span(s): max |SNR_closed - SNR_integral| = %.3f dB\n", n, worst);
    } else {
      const NliSpectrum& s1 = a.method == "closed" ? closed : integral;
      double lo = s1[0].snr_db, hi = s1[0].snr_db;
      for (const auto& e : s1.channels) {
        lo = std::min(lo, e.snr_db);
        hi = std::max(hi, e.snr_db);
      }
      std::printf("%zu span(s), %s: SNR_NLI %.2f to %.2f dB\n", n, a.method.c_str(), lo, hi);
    }
  }
  return 0;
}

struct OptArgs {
  double floor = 0.25;
  std::size_t count = 15;
  double spacing_thz = 1.0;
  double offset_thz = 2.0;
  std::string direction = "FW";
  std::size_t restarts = 3;
  std::size_t max_evals = 3000;
  double p_max_mw = 1000.0;
  double start_mw = 50.0;
};

int cmd_optimize(const Common& c, const OptArgs& a) {
  const LinkPlan plan = load(c);
  std::vector<PumpDirection> dirs;
  if (a.direction == "FW")
    dirs = {PumpDirection::Forward};
  else if (a.direction == "BW")
    dirs = {PumpDirection::Backward};
  else if (a.direction == "FWBW")
    dirs = {PumpDirection::Forward, PumpDirection::Backward};
  else
    throw InputError("--direction must be FW, BW or FWBW");
  SpanConfig span = plan.spans.front();
  span.pumps.pumps.clear();
  PumpDesignProblem pr;
  pr.comb = pump_comb(span.channels, a.count, a.spacing_thz * 1e12, a.offset_thz * 1e12, dirs);
  pr.floor = a.floor;
  pr.restarts = a.restarts;
  pr.max_evaluations = a.max_evals;
  pr.p_max = a.p_max_mw * 1e-3;
  pr.p_start = a.start_mw * 1e-3;
  pr.seed = c.seed;
  pr.validate();

  const fs::path dir = prepare_out(c.out);
  write_manifest(dir, "optimize", c,
                 {{"floor", a.floor}, {"comb_count", a.count}, {"comb_spacing_thz", a.spacing_thz},
                  {"comb_offset_thz", a.offset_thz}, {"direction", a.direction}, {"restarts", a.restarts},
                  {"max_evals", a.max_evals}, {"p_max_mw", a.p_max_mw}, {"start_mw", a.start_mw}});
  // Coarser solver during the search; the result is re-verified at full accuracy.
  SolverSettings search;
  search.grid_points = 201;
  search.ode.rtol = 1e-6;
  PumpDesignReport rep = optimize_pumps(pr, span, search);
  rep.achieved_floor = pump_detail::min_ratio(span, rep.pumps, SolverSettings{});
  rep.feasible = rep.achieved_floor >= pr.floor * (1.0 - pr.tolerance);
  rep.violation_db = rep.achieved_floor > 0.0 ? std::max(0.0, 10.0 * std::log10(pr.floor / rep.achieved_floor)) : 1e9;

  const std::string snippet = pump_snippet(rep.pumps);
  {
    auto os = open_out(dir / "pumps.json");
    os << "{" << snippet << "}\n";
  }
  {
    auto os = open_out(dir / "optimize_report.csv");
    os << "feasible,achieved_floor,floor,violation_db,total_pump_power_mw,pumps,evaluations\n";
    char buf[200];
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.4f,%zu,%zu\n", rep.feasible ? 1 : 0, rep.achieved_floor, pr.floor,
                  rep.violation_db, rep.total_power * 1e3, rep.pumps.size(), rep.evaluations);
    os << buf;
  }
  std::printf("%s, achieved floor %.4f (target %.4f), total pump power %.1f mW, %zu pumps, %zu evaluations\n",
              rep.feasible ? "feasible" : "INFEASIBLE", rep.achieved_floor, pr.floor, rep.total_power * 1e3, rep.pumps.size(),
              rep.evaluations);
  std::printf("%s\n", snippet.c_str());
  return rep.feasible ? 0 : 1;
}

int cmd_verify(double perturb) {
  IdentitySettings s;
  s.perturbation = perturb;
  const IdentityReport rep = verify_identities(s);
  bool ok = rep.all_passed();
  std::printf("identity               draws  max rel error  status\n");
  for (const auto& r : rep.results)
    std::printf("%-22s %5zu  %13.3e  %s\n", r.name.c_str(), r.draws, r.max_rel_error, r.passed ? "PASS" : "FAIL");

  // Lumped reduction: closed form against the integral model on a 5-channel C-band toy.
  SpanConfig span;
  span.fiber = lumped_ssmf();
  span.channels = ChannelPlan::uniform(5, 100e9, units::nm_to_hz(1550.0), 96e9, 1e-3);
  const ProfileFit fit = lumped_fit(span);
  IntegralEngine eng(rho_from_fit(fit, span), span.fiber);
  const SpanNli cl = closed_span_nli(span, fit, false);
  double worst_x = 0.0, worst_s = 0.0;
  for (std::size_t i = 0; i < span.channels.size(); ++i) {
    double x = 0.0;
    for (std::size_t k = 0; k < span.channels.size(); ++k)
      if (k != i) x += eng.eta_xpm(i, k);
    worst_x = std::max(worst_x, std::abs(cl.eta_xpm[i] / x - 1.0));
    worst_s = std::max(worst_s, std::abs(cl.eta_spm[i] / eng.eta_spm(i) - 1.0));
  }
  const bool lumped_ok = worst_x <= 0.05 && worst_s <= 0.10;
  std::printf("lumped reduction: XPM max rel dev %.3f%% (<= 5%%), SPM %.3f%% (<= 10%%)  %s\n", 100 * worst_x, 100 * worst_s,
              lumped_ok ? "PASS" : "FAIL");
  ok = ok && lumped_ok;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Raman-amplified link NLI estimator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub, bool scenario) {
    if (scenario) sub->add_option("--scenario", c.scenario, "scenario JSON file")->required();
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
  };

  auto* profile = app.add_subcommand("profile", "solve the power profiles and fit the semi-analytical model");
  add_common(profile, true);

  NliArgs na;
  auto* nli = app.add_subcommand("nli", "NLI spectra by the closed-form and/or integral model");
  add_common(nli, true);
  nli->add_option("--method", na.method, "closed, integral or both")->capture_default_str();
  nli->add_option("--spans", na.spans, "comma-separated span counts, e.g. 1,3,10");
  nli->add_option("--resolution", na.resolution, "integral model grid points per frequency axis (odd)")->capture_default_str();
  nli->add_flag("--pump-interferers", na.pump_interferers, "add pumps as XPM interferers");
  nli->add_flag("--raw-profile", na.raw_profile, "integral model uses the solver profile instead of the fit");
  nli->add_option("--epsilon", na.epsilon, "coherence factor (overrides the scenario)");

  OptArgs oa;
  auto* opt = app.add_subcommand("optimize", "minimize total pump power subject to a received-power floor");
  add_common(opt, true);
  opt->add_option("--floor", oa.floor, "min P_i(L)/P_i(0) over channels")->capture_default_str();
  opt->add_option("--comb-count", oa.count, "candidate pump frequencies")->capture_default_str();
  opt->add_option("--comb-spacing-thz", oa.spacing_thz, "comb spacing")->capture_default_str();
  opt->add_option("--comb-offset-thz", oa.offset_thz, "lowest pump frequency above the highest channel")->capture_default_str();
  opt->add_option("--direction", oa.direction, "FW, BW or FWBW")->capture_default_str();
  opt->add_option("--restarts", oa.restarts, "Nelder-Mead restarts")->capture_default_str();
  opt->add_option("--max-evals", oa.max_evals, "evaluations per restart")->capture_default_str();
  opt->add_option("--p-max-mw", oa.p_max_mw, "per-pump power bound")->capture_default_str();
  opt->add_option("--start-mw", oa.start_mw, "initial power of every pump")->capture_default_str();

  double perturb = 0.0;
  auto* verify = app.add_subcommand("verify", "check the mathematical identities and the lumped reduction");
  verify->add_option("--perturb", perturb, "test hook: offset added to every identity right-hand side");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*profile) return cmd_profile(c);
    if (*nli) return cmd_nli(c, na);
    if (*opt) return cmd_optimize(c, oa);
    if (*verify) return cmd_verify(perturb);
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
