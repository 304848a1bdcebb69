#include "trmflow/trm_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace trm {

namespace {

void check_unit_range(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error(std::string(what) + " out of [0,1]: " + std::to_string(x));
  }
}

void check_state(const DensityState& state) {
  for (const double u : state.u) check_unit_range(u, "density");
}

void check_rates_nonnegative(const RateVector& rates) {
  for (const double c : rates.c) {
    if (!(c >= 0.0)) throw std::domain_error("rate out of range: " + std::to_string(c));
  }
}

void check_dims(const DensityState& state, const RateVector& rates) {
  if (rates.c.size() != state.u.size() + 1) {
    throw DimensionError("rate vector must have n_cells + 1 entries, got " +
                         std::to_string(rates.c.size()) + " for " +
                         std::to_string(state.u.size()) + " cells");
  }
}

}  // namespace

std::vector<int> RoadGeometry::observed_indices() const {
  std::vector<int> idx;
  for (int i = 0; i < n_interfaces; ++i) {
    if (observed[static_cast<std::size_t>(i)]) idx.push_back(i);
  }
  return idx;
}

int RoadGeometry::n_observed() const {
  return static_cast<int>(observed_indices().size());
}

void RoadGeometry::validate() const {
  if (n_interfaces < 2) throw ConfigError("geometry: need at least 2 interfaces");
  if (n_cells != n_interfaces - 1) throw ConfigError("geometry: n_cells must equal n_interfaces - 1");
  if (!(dx > 0.0)) throw ConfigError("geometry: dx must be positive");
  if (static_cast<int>(observed.size()) != n_interfaces) {
    throw ConfigError("geometry: observed mask length must equal n_interfaces");
  }
  if (n_observed() < 1) throw ConfigError("geometry: at least one observed interface required");
  for (const int h : hidden) {
    if (h < 0 || h >= n_interfaces) throw ConfigError("geometry: hidden index out of range");
  }
}

RoadGeometry make_geometry(int n_interfaces, double dx, const std::vector<int>& observed,
                           const std::vector<int>& hidden) {
  RoadGeometry g;
  g.n_interfaces = n_interfaces;
  g.n_cells = n_interfaces - 1;
  g.dx = dx;
  g.observed.assign(static_cast<std::size_t>(std::max(n_interfaces, 0)), false);
  for (const int i : observed) {
    if (i < 0 || i >= n_interfaces) throw ConfigError("geometry: observed index out of range");
    g.observed[static_cast<std::size_t>(i)] = true;
  }
  g.hidden = hidden;
  g.validate();
  return g;
}

void TrmConfig::validate() const {
  if (!(rho_max > 0.0)) throw ConfigError("trm: rho_max must be positive");
  if (!(dx > 0.0)) throw ConfigError("trm: dx must be positive");
  if (!(dT > 0.0)) throw ConfigError("trm: dT must be positive");
  if (!(v_max > 0.0)) throw ConfigError("trm: v_max must be positive");
  if (p_t < 1) throw ConfigError("trm: p_t must be a positive integer");
  if (!(static_cast<double>(p_t) > 2.0 * v_max * dT / dx)) {
    throw ConfigError("trm: p_t = " + std::to_string(p_t) +
                      " violates the substep bound (needs p_t > " +
                      std::to_string(2.0 * v_max * dT / dx) + ")");
  }
}

double greenshields_flux(double u, double f_max) {
  check_unit_range(u, "density");
  if (!(f_max >= 0.0)) throw std::domain_error("f_max must be nonnegative");
  return 4.0 * f_max * u * (1.0 - u);
}

double numerical_flux(double u_left, double u_right) {
  check_unit_range(u_left, "u_left");
  check_unit_range(u_right, "u_right");
  return u_left * (1.0 - u_right);
}

FluxVector trm_fluxes(const DensityState& state, const RateVector& rates) {
  check_dims(state, rates);
  check_state(state);
  check_rates_nonnegative(rates);
  const Vec& u = state.u;
  const Vec& c = rates.c;
  const int n_i = static_cast<int>(c.size());
  FluxVector out;
  out.f.resize(static_cast<std::size_t>(n_i));
  // Upstream boundary: full road feeding cell 0; downstream: free outflow.
  out.f[0] = c[0] * (1.0 - u[0]);
  for (int k = 1; k < n_i - 1; ++k) {
    out.f[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k)] *
                                         u[static_cast<std::size_t>(k - 1)] *
                                         (1.0 - u[static_cast<std::size_t>(k)]);
  }
  out.f[static_cast<std::size_t>(n_i - 1)] = c[static_cast<std::size_t>(n_i - 1)] * u[u.size() - 1];
  return out;
}

std::pair<DensityState, FluxVector> trm_step(const DensityState& state, const RateVector& rates) {
  check_dims(state, rates);
  for (std::size_t j = 0; j < rates.c.size(); ++j) {
    if (!(rates.c[j] < 0.5)) {
      throw NumericalError("CFL violation: rate[" + std::to_string(j) +
                           "] = " + std::to_string(rates.c[j]) + " >= 1/2");
    }
  }
  FluxVector fl = trm_fluxes(state, rates);
  DensityState next;
  next.u.resize(state.u.size());
  for (std::size_t j = 0; j < state.u.size(); ++j) {
    next.u[j] = state.u[j] + (fl.f[j] - fl.f[j + 1]);
  }
  return {std::move(next), std::move(fl)};
}

Rollout trm_rollout(const DensityState& initial, std::span<const RateVector> rate_seq) {
  Rollout out;
  out.densities.reserve(rate_seq.size());
  out.fluxes.reserve(rate_seq.size());
  DensityState cur = initial;
  for (std::size_t k = 0; k < rate_seq.size(); ++k) {
    try {
      auto [next, fl] = trm_step(cur, rate_seq[k]);
      out.fluxes.push_back(std::move(fl));
      out.densities.push_back(next);
      cur = std::move(next);
    } catch (const NumericalError& e) {
      throw NumericalError("rollout step " + std::to_string(k) + ": " + e.what());
    }
  }
  return out;
}

int compute_substeps(double v_max, double dT, double dx) {
  if (!(v_max > 0.0 && dT > 0.0 && dx > 0.0)) {
    throw std::domain_error("compute_substeps: all arguments must be positive");
  }
  const double bound = 2.0 * v_max * dT / dx;
  int p = static_cast<int>(std::floor(bound)) + 1;
  if (!(static_cast<double>(p) > bound)) ++p;  // bound landed on an integer
  return p;
}

CflCheck check_cfl(const TrmConfig& config, double f_max) {
  if (!(f_max >= 0.0)) throw std::domain_error("check_cfl: f_max must be nonnegative");
  CflCheck r;
  r.lhs = config.dt() / config.dx;
  if (f_max == 0.0) {
    r.rhs = std::numeric_limits<double>::infinity();
    r.pass = true;
    return r;
  }
  r.rhs = config.rho_max / (8.0 * f_max);
  r.pass = r.lhs < r.rhs;
  return r;
}

double flux_scale(const TrmConfig& config) {
  return config.rho_max * config.dx / config.dt();
}

}  // namespace trm
