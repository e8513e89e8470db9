#pragma once

#include <string>
#include <vector>

#include "dhn/physics.hpp"

namespace dhn {

struct SimulateResult {
  Eigen::VectorXd x;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;  // scaled infinity norm
  std::string reason;
  std::vector<double> residual_history;
  // per-block infinity norms at the final state: mass, momentum, thermal
  // node, thermal edge (scaled units)
  double block_mass = 0.0;
  double block_momentum = 0.0;
  double block_thermal_node = 0.0;
  double block_thermal_edge = 0.0;
};

// Damped Newton on the assembled residual: exact sparse LU steps with an
// Armijo backtracking line search on the residual 2-norm.  Tolerance and
// budgets come from the problem's solver options.
SimulateResult simulate(const Assembler& assembler,
                        const Eigen::VectorXd& d_hydraulic,
                        const Eigen::VectorXd& d_thermal,
                        const Eigen::VectorXd& alpha,
                        const Eigen::VectorXd& gamma,
                        const Eigen::VectorXd* x0 = nullptr);

}  // namespace dhn
