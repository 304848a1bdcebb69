#pragma once

#include <span>
#include <utility>
#include <vector>

#include "trmflow/errors.hpp"
#include "trmflow/linalg.hpp"

namespace trm {

// Cell/interface layout of the discretized road. Interfaces are numbered
// 0..n_interfaces-1 left to right; cell j sits between interfaces j and j+1.
// `observed` marks the interfaces whose measurements are used for training;
// `hidden` lists detector-less interfaces that are evaluated separately.
struct RoadGeometry {
  int n_interfaces = 0;
  int n_cells = 0;
  double dx = 0.0;
  std::vector<bool> observed;
  std::vector<int> hidden;

  std::vector<int> observed_indices() const;
  int n_observed() const;
  void validate() const;
};

RoadGeometry make_geometry(int n_interfaces, double dx, const std::vector<int>& observed,
                           const std::vector<int>& hidden);

// Discretization and physical bounds. The TRM substep is dt = dT / p_t;
// p_t must satisfy p_t > 2 * v_max * dT / dx (strictly) so that the CFL
// condition holds for any admissible rate vector.
struct TrmConfig {
  double rho_max = 0.0;  // vehicles per meter
  double dx = 0.0;       // meters (matches RoadGeometry::dx)
  double dT = 0.0;       // measurement period, seconds
  int p_t = 0;           // substeps per measurement period
  double v_max = 0.0;    // meters per second

  double dt() const { return dT / p_t; }
  void validate() const;
};

// Normalized densities u_j = rho_j / rho_max in [0,1], one per cell.
struct DensityState {
  Vec u;
};

// Dimensionless reaction rates, one per interface, each in [0, 1/2).
// Entries 0 and n_interfaces-1 are the absorbed boundary parameters
// (road treated as full upstream and empty downstream).
struct RateVector {
  Vec c;
};

// Dimensionless numerical fluxes, one per interface.
struct FluxVector {
  Vec f;
};

struct Rollout {
  std::vector<DensityState> densities;  // state after each step
  std::vector<FluxVector> fluxes;       // flux used by each step
};

struct CflCheck {
  bool pass = false;
  double lhs = 0.0;  // dt / dx
  double rhs = 0.0;  // rho_max / (8 * f_max)
};

double greenshields_flux(double u, double f_max);
double numerical_flux(double u_left, double u_right);

FluxVector trm_fluxes(const DensityState& state, const RateVector& rates);
std::pair<DensityState, FluxVector> trm_step(const DensityState& state, const RateVector& rates);
Rollout trm_rollout(const DensityState& initial, std::span<const RateVector> rate_seq);

// Smallest integer strictly greater than 2 * v_max * dT / dx.
int compute_substeps(double v_max, double dT, double dx);

CflCheck check_cfl(const TrmConfig& config, double f_max);

// Physical flux (vehicles/second) per unit of dimensionless flux:
// rho_max * dx / dt.
double flux_scale(const TrmConfig& config);

}  // namespace trm
