#pragma once

#include <string>
#include <vector>

#include "dhn/auglag.hpp"
#include "dhn/bound_lbfgs.hpp"

namespace dhn {

enum class RunStatus { Converged, BudgetExhausted, Failed };

std::string to_string(RunStatus s);

// One outer iteration of the continuation: the inner solve that produced it
// and the design it left behind.
struct IterateRecord {
  int stage = 0;
  double steepness = 0.0;
  int outer = 0;  // cumulative across stages
  int inner_iterations = 0;
  double mu = 0.0;
  double value = 0.0;      // augmented Lagrangian, unscaled
  double objective = 0.0;  // J
  double npv = 0.0;
  double max_violation = 0.0;
  double proj_grad = 0.0;  // scaled inner problem
  Eigen::VectorXd diameters;
};

struct StageSummary {
  double steepness = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double npv = 0.0;
  double max_violation = 0.0;
};

struct OptimizeResult {
  RunStatus status = RunStatus::Failed;
  DesignPoint design;
  Eigen::VectorXd state;   // converged state at the final design
  Eigen::VectorXd lambda;  // final multiplier estimates
  double objective = 0.0;
  double npv = 0.0;
  double max_violation = 0.0;
  CostBreakdown costs;
  std::vector<IterateRecord> history;
  std::vector<StageSummary> stages;
  EvalCounters counters;
  std::string message;
};

struct OptimizeOptions {
  // Empty: take the schedule from the problem's solver options.
  std::vector<double> xi_schedule;
  bool verbose = false;
};

// Economic topology optimization under the continuation schedule: one
// augmented-Lagrangian solve per steepness value, multipliers carried
// across stages, followed by a pure-feasibility polish of the operating
// variables at the final design.
OptimizeResult optimize(const Problem& problem, const DesignPoint& start,
                        const OptimizeOptions& options = {});

// Operational repair of a fixed (typically discrete) pipe layout: the
// diameters are frozen and the augmented Lagrangian is rebuilt over the
// operating variables alone from fresh multipliers, then polished to strict
// feasibility.
struct RepairResult {
  DesignPoint design;
  Eigen::VectorXd state;
  double objective = 0.0;
  double npv = 0.0;
  double max_violation = 0.0;
  CostBreakdown costs;
  bool feasible = false;
  bool converged = false;
};
RepairResult repair_operation(const Problem& problem, const DesignPoint& design,
                              bool verbose = false);

// Discrete post-processing of a continuous diameter vector.
DesignPoint snap_to_catalog(const Problem& p, const DesignPoint& d);
DesignPoint round_up_design(const Problem& p, const DesignPoint& d);

// How discrete a raw diameter vector already is.  A pipe counts as kept
// when it clears the void region by a tenth of the first catalog interval;
// a kept pipe is `near` when it lies within tol_fraction of the narrower
// adjacent interval around the closest catalog diameter.
struct Discreteness {
  int pipes_kept = 0;
  int pipes_near = 0;
  double fraction() const {
    return pipes_kept == 0 ? 1.0
                           : static_cast<double>(pipes_near) / pipes_kept;
  }
};
Discreteness discreteness_metric(const Problem& p,
                                 const Eigen::VectorXd& diameters,
                                 double tol_fraction = 0.02);

// Penalized continuation + snap against plain continuous + round-up on one
// catalog; both branches are repaired on the discrete layout before their
// net present values are compared.
struct CatalogOutcome {
  std::string name;
  PipeCatalog catalog;
  OptimizeResult penalized_run;
  OptimizeResult continuous_run;
  RepairResult penalized;  // snap(penalized_run) repaired
  RepairResult rounded;    // round_up(continuous_run) repaired
  double advantage() const { return penalized.npv - rounded.npv; }
};
CatalogOutcome compare_on_catalog(const Problem& base, const std::string& name,
                                  const PipeCatalog& catalog,
                                  const OptimizeOptions& options = {});

// One full design study: continuation, snap, repair; reports the plant
// loading of the final state.
struct ScenarioOutcome {
  OptimizeResult run;
  RepairResult final_design;
  Eigen::VectorXd injection;  // W per producer, graph.producer_feed order
  Eigen::VectorXd share;      // injection / total
};
ScenarioOutcome run_scenario(const Problem& problem,
                             const OptimizeOptions& options = {});

// Price-sensitivity pair on a shared starting point.  The patched side also
// considers the base design re-repaired under the patched prices and keeps
// whichever ends up better, so a cheaper price can never look worse merely
// because the fresh run wandered off.
struct ScenarioPair {
  ScenarioOutcome base;
  ScenarioOutcome patched;
  bool patched_reused_base_design = false;
};
ScenarioPair run_scenario_pair(const Problem& base, const Problem& patched,
                               const OptimizeOptions& options = {});

}  // namespace dhn
