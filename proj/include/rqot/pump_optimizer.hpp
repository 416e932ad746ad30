#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "rqot/raman.hpp"

namespace rqot {

struct PumpCandidate {
  double frequency;  // Hz
  PumpDirection direction;
};

struct PumpDesignProblem {
  std::vector<PumpCandidate> comb;
  double floor = 0.25;                // min over channels of P_i(L) / P_i(0)
  double p_max = 1.0;                 // W, per pump
  double p_start = 0.05;              // W, first restart starts every pump here
  std::size_t restarts = 3;
  std::size_t max_evaluations = 3000; // per restart
  double penalty = 10.0;              // W per dB of floor violation
  double prune_below = 1e-6;          // W
  double tolerance = 1e-3;            // relative slack on the floor when judging feasibility
  std::uint64_t seed = 1;

  void validate() const {
    if (comb.empty()) throw InputError("optimize: candidate pump comb is empty");
    if (!(floor > 0.0) || floor > 1.0) throw InputError("optimize: floor fraction must be in (0, 1]");
    if (!(p_max > 0.0)) throw InputError("optimize: P_max must be > 0");
    if (!(p_start > 0.0) || p_start > p_max) throw InputError("optimize: start power must be in (0, P_max]");
    if (restarts < 1) throw InputError("optimize: at least one restart required");
    if (max_evaluations < 10) throw InputError("optimize: max evaluations must be >= 10");
  }
};

/// Equally spaced comb whose lowest frequency sits `offset` above the lowest channel.
inline std::vector<PumpCandidate> pump_comb(const ChannelPlan& channels, std::size_t count, double spacing, double offset,
                                            const std::vector<PumpDirection>& directions) {
  if (channels.empty()) throw InputError("optimize: channel plan is empty");
  if (count == 0 || !(spacing > 0.0) || !(offset > 0.0)) throw InputError("optimize: comb needs count, spacing, offset > 0");
  if (directions.empty()) throw InputError("optimize: no pump direction selected");
  const double f0 = channels.channels.back().frequency + offset;
  std::vector<PumpCandidate> comb;
  for (std::size_t k = 0; k < count; ++k)
    for (auto d : directions) comb.push_back({f0 + spacing * static_cast<double>(k), d});
  return comb;
}

struct PumpDesignReport {
  PumpSet pumps;
  bool feasible = false;
  double achieved_floor = 0.0;  // min over channels of P_i(L) / P_i(0)
  double violation_db = 0.0;    // shortfall below the floor, dB
  double total_power = 0.0;     // W
  std::size_t evaluations = 0;
  std::size_t best_restart = 0;
};

namespace pump_detail {

inline PumpSet active_set(const std::vector<PumpCandidate>& comb, const std::vector<double>& p, double prune) {
  PumpSet set;
  for (std::size_t k = 0; k < comb.size(); ++k)
    if (p[k] >= prune) set.pumps.push_back({comb[k].frequency, comb[k].direction, p[k]});
  return set;
}

/// Min received fraction over channels; -1 on solver failure.
inline double min_ratio(const SpanConfig& base, const PumpSet& pumps, const SolverSettings& s) {
  SpanConfig span = base;
  span.pumps = pumps;
  try {
    const PowerProfile prof = solve_span(span, s);
    const std::size_t last = prof.num_points() - 1;
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prof.num_channels; ++i) r = std::min(r, prof.power(i, last) / prof.power(i, 0));
    return r;
  } catch (const NumericalError&) {
    return -1.0;
  }
}

struct Context {
  const PumpDesignProblem* problem;
  const SpanConfig* base;
  const SolverSettings* settings;
  std::size_t evaluations = 0;
};

// Powers map to x through P = P_max sin^2(x), which keeps every trial inside [0, P_max].
inline double power_of(double x, double p_max) {
  const double s = std::sin(x);
  return p_max * s * s;
}

inline double objective(const gsl_vector* x, void* params) {
  auto& ctx = *static_cast<Context*>(params);
  const auto& pr = *ctx.problem;
  std::vector<double> p(x->size);
  double total = 0.0;
  for (std::size_t k = 0; k < x->size; ++k) total += p[k] = power_of(gsl_vector_get(x, k), pr.p_max);
  ++ctx.evaluations;
  const double r = min_ratio(*ctx.base, active_set(pr.comb, p, pr.prune_below), *ctx.settings);
  if (r <= 0.0) return total + pr.penalty * 100.0;
  const double short_db = std::max(0.0, 10.0 * std::log10(pr.floor / r));
  return total + pr.penalty * short_db;
}

}  // namespace pump_detail

/// Minimizes the total pump power subject to the received-power floor by
/// penalized Nelder-Mead with restarts. Each evaluation solves one span.
inline PumpDesignReport optimize_pumps(const PumpDesignProblem& problem, const SpanConfig& base,
                                       const SolverSettings& settings = {}) {
  problem.validate();
  base.fiber.validate();
  base.channels.validate();
  const std::size_t n = problem.comb.size();
  pump_detail::Context ctx{&problem, &base, &settings};
  gsl_set_error_handler_off();

  std::mt19937_64 rng(problem.seed);
  std::uniform_real_distribution<double> start_dist(0.0, 2.0 * problem.p_start);
  std::vector<double> best_p;
  double best_f = std::numeric_limits<double>::infinity();
  PumpDesignReport rep;

  for (std::size_t r = 0; r < problem.restarts; ++r) {
    std::vector<double> p0(n, problem.p_start);
    if (r > 0)
      for (auto& v : p0) v = std::min(start_dist(rng), problem.p_max);
    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* step = gsl_vector_alloc(n);
    for (std::size_t k = 0; k < n; ++k) {
      gsl_vector_set(x, k, std::asin(std::sqrt(p0[k] / problem.p_max)));
      gsl_vector_set(step, k, 0.3);
    }
    gsl_multimin_function fn{&pump_detail::objective, n, &ctx};
    gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(m, &fn, x, step);
    const std::size_t budget = ctx.evaluations + problem.max_evaluations;
    while (ctx.evaluations < budget) {
      if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-5) == GSL_SUCCESS) break;
    }
    const double f = gsl_multimin_fminimizer_minimum(m);
    if (f < best_f) {
      best_f = f;
      best_p.resize(n);
      for (std::size_t k = 0; k < n; ++k)
        best_p[k] = pump_detail::power_of(gsl_vector_get(gsl_multimin_fminimizer_x(m), k), problem.p_max);
      rep.best_restart = r;
    }
    gsl_multimin_fminimizer_free(m);
    gsl_vector_free(x);
    gsl_vector_free(step);
  }

  auto judge = [&](const PumpSet& set) {
    const double ratio = pump_detail::min_ratio(base, set, settings);
    ++ctx.evaluations;
    return ratio;
  };
  // Prune, then keep the pruned set only if feasibility is unchanged.
  PumpSet raw = pump_detail::active_set(problem.comb, best_p, 0.0);
  for (auto it = raw.pumps.begin(); it != raw.pumps.end();)
    it = it->power > 0.0 ? it + 1 : raw.pumps.erase(it);
  PumpSet pruned = pump_detail::active_set(problem.comb, best_p, problem.prune_below);
  const double floor_ok = problem.floor * (1.0 - problem.tolerance);
  const double r_raw = judge(raw), r_pruned = judge(pruned);
  const bool use_pruned = (r_pruned >= floor_ok) == (r_raw >= floor_ok);
  rep.pumps = use_pruned ? pruned : raw;
  rep.achieved_floor = use_pruned ? r_pruned : r_raw;
  rep.feasible = rep.achieved_floor >= floor_ok;
  rep.violation_db = rep.achieved_floor > 0.0 ? std::max(0.0, 10.0 * std::log10(problem.floor / rep.achieved_floor))
                                              : std::numeric_limits<double>::infinity();
  rep.total_power = rep.pumps.total_power();
  rep.evaluations = ctx.evaluations;
  return rep;
}

/// The pump set in scenario-file syntax.
inline std::string pump_snippet(const PumpSet& set) {
  std::string out = "\"pumps\": [";
  char buf[160];
  for (std::size_t k = 0; k < set.pumps.size(); ++k) {
    const auto& p = set.pumps[k];
    std::snprintf(buf, sizeof buf, "%s\n  {\"wavelength_nm\": %.2f, \"direction\": \"%s\", \"power_mw\": %.4f}", k ? "," : "",
                  units::hz_to_nm(p.frequency), to_string(p.direction), p.power * 1e3);
    out += buf;
  }
  out += set.pumps.empty() ? "]" : "\n]";
  return out;
}

}  // namespace rqot
