#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dhn/catalog.hpp"
#include "dhn/network.hpp"

namespace dhn {

struct PhysicalParams {
  double rho = 983.0;                 // kg/m^3
  double mu = 4.67e-4;                // Pa s
  double cp = 4185.0;                 // J/(kg K)
  double t_ambient_c = -8.0;          // deg C, reference for all temperatures
  double lambda_ground = 1.0;         // W/(m K)
  double lambda_insulation = 0.0225;  // W/(m K)
  double burial_depth = 1.0;          // m
  double casing_ratio = 1.87;         // outer casing over inner diameter

  double volumetric_heat_capacity() const { return rho * cp; }

  bool operator==(const PhysicalParams&) const = default;
};

struct EconomicParams {
  double horizon_years = 30.0;
  double discount_rate = 0.05;
  double c_revenue = 8e-5;        // EUR/Wh sold
  double pump_efficiency = 0.81;
  // Pump capacity cost sits in the investment bracket by default; switch it
  // off to reproduce the older operating-cost-only objective.
  bool include_pump_capex = true;

  bool operator==(const EconomicParams&) const = default;
};

struct SolverOptions {
  // Flow regularisation and upwind smoothing width.
  double q_eps = 1e-6;  // m^3/s
  // Minimum heat exchanger approach, K; smooth floor width equals the value.
  double approach_floor = 0.1;
  // Residual row scales; constant, part of the residual definition.
  double q_scale = 1e-3;      // m^3/s
  double p_scale = 1e5;       // Pa
  double theta_scale = 50.0;  // K

  double newton_tol = 1e-9;  // scaled residual infinity norm
  int newton_max_iter = 50;
  int newton_max_backtracks = 20;

  double reference_pressure = 0.0;  // Pa at the reference node

  // Penalization
  double clip_beta = 1e-3;
  std::vector<double> xi_schedule = {0.0, 2.0, 4.0};

  // Demand tolerance band, fraction of contracted demand.
  double demand_margin = 0.05;

  // Augmented Lagrangian outer loop.
  double mu0 = 10.0;
  double mu_growth = 10.0;
  double omega0 = 1e-2;
  double omega_final = 1e-6;
  double eta0 = 1e-2;
  double eta_final = 1e-4;
  int max_outer = 30;
  int max_inner = 400;
  int lbfgs_memory = 20;

  // Initial operating point.
  double gamma_init = 2e5;       // Pa plant pressure rise
  double nominal_dt = 30.0;      // K, sizing temperature drop for q_max
  double nominal_dp = 0.5e5;     // Pa, valve drop at fully open nominal flow

  bool operator==(const SolverOptions&) const = default;
};

struct Problem {
  NetworkGraph graph;
  PipeCatalog catalog;
  PhysicalParams physical;
  EconomicParams economics;
  SolverOptions solver;

  bool operator==(const Problem&) const = default;
};

// One point of the design space: a diameter per candidate pipe plus the
// operating variables (consumer edge openings as a fraction of q_max, plant
// pressure rises in Pa).  Orderings follow the graph index sets.
struct DesignPoint {
  Eigen::VectorXd diameters;
  Eigen::VectorXd alpha;
  Eigen::VectorXd gamma;
};

// (zeta, q_max) for a consumer from its contracted demand: q_max clears the
// demand at dt_nominal, zeta drops dp_nominal at q_max fully open.
struct ValveSizing {
  double zeta = 0.0;
  double q_max = 0.0;
};
ValveSizing size_consumer_valve(double demand, const PhysicalParams& phys,
                                double dt_nominal, double dp_nominal);

// Default starting point: every pipe at the catalog maximum, openings at the
// nominal demand fraction, plant rises at gamma_init.
DesignPoint initial_design(const Problem& p);

// Box bounds of the design space in the same packing order as
// ReducedProblem::pack (diameters, alphas, gammas).
void design_bounds(const Problem& p, Eigen::VectorXd& lower,
                   Eigen::VectorXd& upper);

}  // namespace dhn
