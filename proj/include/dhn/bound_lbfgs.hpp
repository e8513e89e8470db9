#pragma once

#include <Eigen/Dense>
#include <functional>

namespace dhn {

// Box-constrained limited-memory quasi-Newton minimization: two-loop
// recursion on the free variables, Armijo backtracking along the projected
// path, gradient-projection fallback when the quasi-Newton direction fails.
struct InnerOptions {
  int memory = 10;
  int max_iterations = 200;
  double grad_tol = 1e-6;  // projected gradient infinity norm
  double armijo = 1e-4;
  int max_backtracks = 30;
};

struct InnerReport {
  int iterations = 0;
  int evaluations = 0;
  double proj_grad = 0.0;
  double value = 0.0;
  bool converged = false;
  bool stalled = false;  // line search ran out before the tolerance was met
};

// Returns false when the point cannot be evaluated (treated as +inf by the
// line search; fatal at the starting point).
using BoxObjective =
    std::function<bool(const Eigen::VectorXd& z, double& f, Eigen::VectorXd* g)>;

// Called once per accepted iterate (including the starting point).
using IterateCallback =
    std::function<void(int iteration, const Eigen::VectorXd& z, double f,
                       double proj_grad)>;

InnerReport minimize_box(const BoxObjective& objective, Eigen::VectorXd& z,
                         const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper, const InnerOptions& opt,
                         const IterateCallback& callback = {});

}  // namespace dhn
