#pragma once

#include <Eigen/Dense>
#include <memory>

#include "dhn/constraints.hpp"
#include "dhn/economics.hpp"
#include "dhn/newton.hpp"
#include "dhn/penalization.hpp"
#include "dhn/problem.hpp"

namespace dhn {

// Multiplier estimates and penalty weight of the outer loop.  Multipliers
// are nonpositive in this sign convention (L = J - lambda' g + mu/2 g'g).
struct AugLagState {
  Eigen::VectorXd lambda;
  double mu = 10.0;
};

// Inequalities enter through g = h + s with the slack at its closed-form
// minimizer s = max(0, lambda/mu - h), i.e. g = max(h, lambda/mu).
Eigen::VectorXd eliminated_slack(const Eigen::VectorXd& h,
                                 const AugLagState& st);
Eigen::VectorXd augmented_constraints(const Eigen::VectorXd& h,
                                      const AugLagState& st);
double auglag_value(double objective, const Eigen::VectorXd& h,
                    const AugLagState& st);
// dL/dh; zero on inactive rows, mu h - lambda on active ones (continuous
// across the switch).
Eigen::VectorXd auglag_weights(const Eigen::VectorXd& h, const AugLagState& st);
// First-order multiplier update lambda - mu g, equivalently min(0, lambda - mu h).
Eigen::VectorXd updated_multipliers(const Eigen::VectorXd& h,
                                    const AugLagState& st);

struct EvalCounters {
  long simulations = 0;
  long newton_iterations = 0;
  long adjoint_solves = 0;
  long value_evals = 0;
  long gradient_evals = 0;
};

struct EvalRecord {
  double value = 0.0;         // augmented Lagrangian, unscaled
  double objective = 0.0;     // J
  double npv = 0.0;
  Eigen::VectorXd h;
  double max_violation = 0.0; // max(h, 0) infinity norm
  CostBreakdown costs;
  bool sim_converged = false;
  double sim_residual = 0.0;
  int sim_iterations = 0;
};

// The box-constrained inner problem over z = (diameters, openings, plant
// rises), all scaled to O(1).  Evaluations simulate the network (warm
// started), apply the penalized diameters per discipline and produce the
// augmented Lagrangian with its adjoint gradient: one transposed solve of
// the converged flow Jacobian per gradient.
class ReducedProblem {
 public:
  ReducedProblem(const Problem& problem, double steepness);

  int num_vars() const;
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

  Eigen::VectorXd pack(const DesignPoint& d) const;
  DesignPoint unpack(const Eigen::VectorXd& z) const;

  void set_steepness(double s) { steepness_ = s; }
  double steepness() const { return steepness_; }
  void set_beta(double b) { beta_ = b; }
  double beta() const { return beta_; }
  // Scale applied to the returned value/gradient (not to the record).
  void set_objective_scale(double s) { objective_scale_ = s; }
  // 0 turns the cost term off, leaving the pure constraint penalty
  // (feasibility restoration).
  void set_objective_weight(double w) { objective_weight_ = w; }
  // Pin the diameter block (operational repair at fixed topology).
  void freeze_diameters(const Eigen::VectorXd& d);
  void unfreeze_diameters(const Problem& problem);

  // false: the flow solve failed at this point (treat as +inf).
  bool evaluate(const Eigen::VectorXd& z, const AugLagState& st, double& value,
                Eigen::VectorXd* grad, EvalRecord* record);

  void reset_warm_start() { has_warm_ = false; }
  const Eigen::VectorXd& last_state() const { return x_last_; }
  const ConstraintSet& constraints() const { return constraints_; }

  EvalCounters counters;

 private:
  const Problem* problem_;
  Assembler assembler_;
  CostModel cost_model_;
  ConstraintSet constraints_;
  double steepness_;
  double beta_;
  double objective_scale_ = 1.0;
  double objective_weight_ = 1.0;
  Eigen::VectorXd lower_, upper_;
  Eigen::VectorXd var_scale_;  // unscaled = scaled * var_scale
  Eigen::VectorXd x_warm_, x_last_, z_warm_;
  bool has_warm_ = false;
};

}  // namespace dhn
