#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rqot/ode.hpp"
#include "rqot/plan.hpp"

namespace rqot {

enum class EntityKind { Channel, ForwardPump, BackwardPump };

inline const char* to_string(EntityKind k) {
  switch (k) {
    case EntityKind::Channel: return "ch";
    case EntityKind::ForwardPump: return "fw";
    case EntityKind::BackwardPump: return "bw";
  }
  return "?";
}

struct Entity {
  double frequency;
  EntityKind kind;
};

/// Power versus distance for every channel and pump of one span.
struct PowerProfile {
  std::vector<double> z;           // m, z.front() = 0, z.back() = L
  std::vector<Entity> entities;    // channels first (plan order), then pumps (plan order)
  std::vector<double> powers;      // entity-major: powers[e * z.size() + k]
  std::size_t num_channels = 0;
  ode::Stats stats;
  std::size_t bvp_iterations = 0;
  double bvp_residual = 0.0;       // max relative mismatch of BW pumps at z = L

  std::size_t num_points() const { return z.size(); }
  double length() const { return z.back(); }
  double power(std::size_t e, std::size_t k) const { return powers[e * z.size() + k]; }
  std::span<const double> row(std::size_t e) const { return {powers.data() + e * z.size(), z.size()}; }
};

enum class BvpMethod { Newton, Diagonal };

struct SolverSettings {
  ode::Settings ode;
  std::size_t grid_points = 1001;
  double power_cap = 1e3;  // W; a trial shot above this is treated as a blow-up
  std::size_t bvp_max_iterations = 200;
  double bvp_tolerance = 1e-6;
  double bvp_damping = 0.5;
  BvpMethod bvp_method = BvpMethod::Newton;

  void validate() const {
    if (!(ode.rtol > 0.0) || !(ode.atol > 0.0) || !(ode.initial_step > 0.0))
      throw InputError("solver settings: tolerances and initial step must be > 0");
    if (bvp_max_iterations < 1) throw InputError("solver settings: max BVP iterations must be >= 1");
    if (!(bvp_tolerance > 0.0)) throw InputError("solver settings: BVP tolerance must be > 0");
    if (!(bvp_damping > 0.0) || bvp_damping > 1.0) throw InputError("solver settings: damping must be in (0, 1]");
    if (grid_points < 2) throw InputError("solver settings: grid needs at least two points");
  }
};

/// Precomputed coupled Raman system for one span.
///
/// For entity i, dP_i/dz = s_i P_i (sum_j c_ij P_j - alpha_i), with s_i = -1
/// for backward pumps and +1 otherwise. A higher-frequency donor j gives
/// c_ij = g_r(|f_i - f_j|); towards a lower-frequency recipient j the donor
/// loses c_ij = -(f_i/f_j) g_r(|f_i - f_j|), so photon number is conserved.
class RamanSystem {
 public:
  RamanSystem(const FiberSpec& fiber, std::vector<Entity> entities) : entities_(std::move(entities)) {
    const std::size_t n = entities_.size();
    alpha_.resize(n);
    sign_.resize(n);
    coupling_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double fi = entities_[i].frequency;
      alpha_[i] = fiber.alpha(fi);
      sign_[i] = entities_[i].kind == EntityKind::BackwardPump ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double fj = entities_[j].frequency;
        const double g = fiber.raman_gain.at(fi - fj);
        coupling_[i * n + j] = fj > fi ? g : -(fi / fj) * g;
      }
    }
  }

  std::size_t size() const { return entities_.size(); }
  const std::vector<Entity>& entities() const { return entities_; }
  double alpha(std::size_t i) const { return alpha_[i]; }
  double coupling(std::size_t i, std::size_t j) const { return coupling_[i * entities_.size() + j]; }

  void operator()(double /*z*/, const std::vector<double>& p, std::vector<double>& dpdz) const {
    const std::size_t n = entities_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double* c = coupling_.data() + i * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += c[j] * p[j];
      dpdz[i] = sign_[i] * p[i] * (acc - alpha_[i]);
    }
  }

 private:
  std::vector<Entity> entities_;
  std::vector<double> alpha_;
  std::vector<double> sign_;
  std::vector<double> coupling_;
};

namespace raman_detail {

inline std::vector<Entity> entities_of(const SpanConfig& span) {
  std::vector<Entity> e;
  for (const auto& c : span.channels.channels) e.push_back({c.frequency, EntityKind::Channel});
  for (const auto& p : span.pumps.pumps)
    e.push_back({p.frequency, p.direction == PumpDirection::Forward ? EntityKind::ForwardPump : EntityKind::BackwardPump});
  return e;
}

inline std::vector<double> uniform_grid(double L, std::size_t n) {
  std::vector<double> z(n);
  for (std::size_t k = 0; k < n; ++k) z[k] = L * static_cast<double>(k) / static_cast<double>(n - 1);
  z.back() = L;
  return z;
}

inline PowerProfile to_profile(const ode::Trajectory& t, std::vector<Entity> entities, std::size_t num_channels) {
  PowerProfile p;
  p.z = t.grid;
  p.entities = std::move(entities);
  p.num_channels = num_channels;
  p.stats = t.stats;
  const std::size_t nz = t.grid.size(), ne = t.dim;
  p.powers.resize(nz * ne);
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t e = 0; e < ne; ++e) p.powers[e * nz + k] = t.at(k, e);
  return p;
}

}  // namespace raman_detail

/// Right-hand side of the coupled Raman equations at one point.
inline std::vector<double> rhs(const FiberSpec& fiber, const std::vector<Entity>& entities, const std::vector<double>& powers) {
  if (powers.size() != entities.size()) throw InputError("rhs: power vector size does not match entities");
  for (double p : powers)
    if (p < 0.0) throw InputError("rhs: powers must be >= 0");
  RamanSystem sys(fiber, entities);
  std::vector<double> d(powers.size());
  sys(0.0, powers, d);
  return d;
}

/// Integrates the coupled system from z = 0 with the given initial powers
/// (entity order: channels, then pumps). BW-pump rows are integrated
/// with their sign flip, so their initial values are z = 0 guesses.
inline PowerProfile integrate_span(const SpanConfig& span, const std::vector<double>& initial, const SolverSettings& s) {
  auto entities = raman_detail::entities_of(span);
  RamanSystem sys(span.fiber, entities);
  auto grid = raman_detail::uniform_grid(span.fiber.span_length, s.grid_points);
  ode::Settings os = s.ode;
  os.max_value = s.power_cap;
  auto traj = ode::integrate(sys, grid, initial, os);
  return raman_detail::to_profile(traj, std::move(entities), span.channels.size());
}

/// Forward-only integration: every boundary condition sits at z = 0.
inline PowerProfile solve_forward(const SpanConfig& span, const SolverSettings& s = {}) {
  span.validate();
  s.validate();
  if (span.pumps.count(PumpDirection::Backward) > 0)
    throw InputError("solve_forward: pump set contains backward pumps; use solve_bvp");
  std::vector<double> p0;
  for (const auto& c : span.channels.channels) p0.push_back(c.power);
  for (const auto& p : span.pumps.pumps) p0.push_back(p.power);
  return integrate_span(span, p0, s);
}

namespace raman_detail {

// Log-domain shooting residual: ln P_bw(L) - ln P_target per backward pump.
struct Shot {
  bool ok = false;
  PowerProfile prof;
  std::vector<double> residual;
  double worst = std::numeric_limits<double>::infinity();  // max relative mismatch
};

inline Shot shoot(const SpanConfig& span, const std::vector<double>& p0, const std::vector<std::size_t>& bw,
                  const SolverSettings& s) {
  Shot sh;
  try {
    sh.prof = integrate_span(span, p0, s);
  } catch (const NumericalError&) {
    return sh;
  }
  const std::size_t nch = span.channels.size(), last = sh.prof.num_points() - 1;
  sh.residual.resize(bw.size());
  sh.worst = 0.0;
  for (std::size_t b = 0; b < bw.size(); ++b) {
    const double target = span.pumps.pumps[bw[b] - nch].power;
    const double reached = sh.prof.power(bw[b], last);
    if (!(reached > 0.0)) return sh;
    sh.residual[b] = std::log(reached / target);
    sh.worst = std::max(sh.worst, std::abs(reached - target) / target);
  }
  sh.ok = true;
  return sh;
}

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace raman_detail

/// Two-point boundary value problem by shooting on the z = 0 powers of the
/// backward pumps.
///
/// The correction is multiplicative (applied to ln P(0)). With
/// BvpMethod::Newton the log-domain step solves the finite-difference
/// sensitivity matrix of ln P_bw(L), which handles the pump-to-pump cross
/// coupling; BvpMethod::Diagonal applies P(0) *= (P_target / P(L))^damping.
/// Both back off (halve the step) when a shot runs away.
inline PowerProfile solve_bvp(const SpanConfig& span, const SolverSettings& s = {}) {
  span.validate();
  s.validate();
  if (span.pumps.count(PumpDirection::Backward) == 0)
    throw InputError("solve_bvp: pump set contains no backward pumps");

  const std::size_t nch = span.channels.size();
  const double L = span.fiber.span_length;
  std::vector<double> p0;
  for (const auto& c : span.channels.channels) p0.push_back(c.power);
  std::vector<std::size_t> bw;
  for (std::size_t k = 0; k < span.pumps.size(); ++k) {
    const auto& p = span.pumps.pumps[k];
    if (p.direction == PumpDirection::Backward) {
      bw.push_back(nch + k);
      p0.push_back(p.power * std::exp(-span.fiber.alpha(p.frequency) * L));
    } else {
      p0.push_back(p.power);
    }
  }
  const std::size_t m = bw.size();
  std::size_t shots = 0;
  auto shoot = [&](const std::vector<double>& q) {
    ++shots;
    return raman_detail::shoot(span, q, bw, s);
  };

  // Before any shot succeeds, scale the guesses down until one does.
  raman_detail::Shot cur = shoot(p0);
  while (!cur.ok && shots < s.bvp_max_iterations) {
    for (std::size_t e : bw) p0[e] *= 0.1;
    cur = shoot(p0);
  }

  std::size_t it = 0;
  while (cur.ok && it < s.bvp_max_iterations) {
    if (cur.worst < s.bvp_tolerance) {
      cur.prof.bvp_iterations = it + 1;
      cur.prof.bvp_residual = cur.worst;
      return std::move(cur.prof);
    }
    ++it;

    std::vector<double> step(m);
    if (s.bvp_method == BvpMethod::Newton) {
      const double h = 1e-4;
      Eigen::MatrixXd J(m, m);
      bool ok = true;
      for (std::size_t c = 0; c < m && ok; ++c) {
        auto q = p0;
        q[bw[c]] *= std::exp(h);
        auto sh = shoot(q);
        ok = sh.ok;
        for (std::size_t r = 0; r < m && ok; ++r) J(r, c) = (sh.residual[r] - cur.residual[r]) / h;
      }
      Eigen::VectorXd rhs(m);
      for (std::size_t r = 0; r < m; ++r) rhs[r] = -cur.residual[r];
      Eigen::VectorXd d = ok ? Eigen::VectorXd(J.partialPivLu().solve(rhs)) : Eigen::VectorXd(rhs * s.bvp_damping);
      if (!d.allFinite()) d = rhs * s.bvp_damping;
      for (std::size_t r = 0; r < m; ++r) step[r] = d[r];
    } else {
      for (std::size_t r = 0; r < m; ++r) step[r] = -s.bvp_damping * cur.residual[r];
    }

    // Backtracking on the log-step until the mismatch decreases.
    const double f0 = raman_detail::norm2(cur.residual);
    double lambda = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt, lambda *= 0.5) {
      auto q = p0;
      for (std::size_t r = 0; r < m; ++r) q[bw[r]] *= std::exp(lambda * step[r]);
      auto sh = shoot(q);
      if (sh.ok && (raman_detail::norm2(sh.residual) < f0 || s.bvp_method == BvpMethod::Diagonal)) {
        p0 = std::move(q);
        cur = std::move(sh);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  std::ostringstream os;
  os << "solve_bvp: no convergence after " << it << " iterations (worst relative mismatch " << cur.worst << ")";
  throw NumericalError(os.str());
}

/// Dispatches to solve_forward or solve_bvp.
inline PowerProfile solve_span(const SpanConfig& span, const SolverSettings& s = {}) {
  return span.pumps.count(PumpDirection::Backward) > 0 ? solve_bvp(span, s) : solve_forward(span, s);
}

/// rho(z) = P(z, f_i) / P(0, f_i) on the profile grid.
inline std::vector<double> normalized_profile(const PowerProfile& prof, std::size_t i) {
  if (i >= prof.entities.size()) throw InputError("normalized_profile: entity index out of range");
  const double p0 = prof.power(i, 0);
  if (!(p0 > 0.0)) throw InputError("normalized_profile: zero launch power");
  std::vector<double> rho(prof.num_points());
  for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = prof.power(i, k) / p0;
  rho.front() = 1.0;
  return rho;
}

/// CSV: z_km then one column per entity in mW, labeled kind_wavelength.
inline void write_profile_csv(std::ostream& os, const PowerProfile& prof) {
  char buf[64];
  os << "z_km";
  for (const auto& e : prof.entities) {
    std::snprintf(buf, sizeof buf, ",%s_%.2fnm_mW", to_string(e.kind), units::hz_to_nm(e.frequency));
    os << buf;
  }
  os << '\n';
  for (std::size_t k = 0; k < prof.num_points(); ++k) {
    std::snprintf(buf, sizeof buf, "%.6f", units::m_to_km(prof.z[k]));
    os << buf;
    for (std::size_t e = 0; e < prof.entities.size(); ++e) {
      std::snprintf(buf, sizeof buf, ",%.9e", prof.power(e, k) * 1e3);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace rqot
