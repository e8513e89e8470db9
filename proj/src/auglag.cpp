#include "dhn/auglag.hpp"

#include <Eigen/SparseLU>
#include <cmath>

namespace dhn {

Eigen::VectorXd eliminated_slack(const Eigen::VectorXd& h,
                                 const AugLagState& st) {
  return (st.lambda.array() / st.mu - h.array()).max(0.0);
}

Eigen::VectorXd augmented_constraints(const Eigen::VectorXd& h,
                                      const AugLagState& st) {
  return h.array().max(st.lambda.array() / st.mu);
}

double auglag_value(double objective, const Eigen::VectorXd& h,
                    const AugLagState& st) {
  Eigen::VectorXd g = augmented_constraints(h, st);
  return objective - st.lambda.dot(g) + 0.5 * st.mu * g.squaredNorm();
}

Eigen::VectorXd auglag_weights(const Eigen::VectorXd& h,
                               const AugLagState& st) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i)
    if (h[i] > st.lambda[i] / st.mu) w[i] = st.mu * h[i] - st.lambda[i];
  return w;
}

Eigen::VectorXd updated_multipliers(const Eigen::VectorXd& h,
                                    const AugLagState& st) {
  return (st.lambda.array() - st.mu * h.array()).min(0.0);
}

ReducedProblem::ReducedProblem(const Problem& problem, double steepness)
    : problem_(&problem),
      assembler_(problem, FlowModel::Reduced),
      cost_model_(problem),
      constraints_(problem),
      steepness_(steepness),
      beta_(problem.solver.clip_beta) {
  design_bounds(problem, lower_, upper_);
  int np = problem.graph.num_pipes();
  int nc = static_cast<int>(problem.graph.consumer_edges.size());
  int ns = problem.graph.num_producers();
  var_scale_.resize(np + nc + ns);
  var_scale_.segment(0, np).setConstant(problem.catalog.d_max());
  var_scale_.segment(np, nc).setConstant(1.0);
  var_scale_.segment(np + nc, ns).setConstant(problem.solver.p_scale);
  lower_.array() /= var_scale_.array();
  upper_.array() /= var_scale_.array();
}

int ReducedProblem::num_vars() const {
  return static_cast<int>(var_scale_.size());
}

Eigen::VectorXd ReducedProblem::pack(const DesignPoint& d) const {
  Eigen::VectorXd z(num_vars());
  int np = static_cast<int>(d.diameters.size());
  int nc = static_cast<int>(d.alpha.size());
  z.segment(0, np) = d.diameters;
  z.segment(np, nc) = d.alpha;
  z.segment(np + nc, d.gamma.size()) = d.gamma;
  return z.cwiseQuotient(var_scale_);
}

DesignPoint ReducedProblem::unpack(const Eigen::VectorXd& z) const {
  const NetworkGraph& g = problem_->graph;
  int np = g.num_pipes();
  int nc = static_cast<int>(g.consumer_edges.size());
  int ns = g.num_producers();
  Eigen::VectorXd raw = z.cwiseProduct(var_scale_);
  DesignPoint d;
  d.diameters = raw.segment(0, np);
  d.alpha = raw.segment(np, nc);
  d.gamma = raw.segment(np + nc, ns);
  return d;
}

void ReducedProblem::freeze_diameters(const Eigen::VectorXd& d) {
  int np = problem_->graph.num_pipes();
  lower_.segment(0, np) = d.cwiseQuotient(var_scale_.segment(0, np));
  upper_.segment(0, np) = lower_.segment(0, np);
}

void ReducedProblem::unfreeze_diameters(const Problem& problem) {
  int np = problem.graph.num_pipes();
  lower_.segment(0, np).setConstant(problem.catalog.d_min() /
                                    problem.catalog.d_max());
  upper_.segment(0, np).setConstant(1.0);
}

bool ReducedProblem::evaluate(const Eigen::VectorXd& z, const AugLagState& st,
                              double& value, Eigen::VectorXd* grad,
                              EvalRecord* record) {
  DesignPoint d = unpack(z);
  PenalizedDiameters pen =
      apply_directions(d.diameters, steepness_, problem_->catalog, beta_);

  SimulateResult sim =
      simulate(assembler_, pen.hydraulic, pen.thermal, d.alpha, d.gamma,
               has_warm_ ? &x_warm_ : nullptr);
  ++counters.simulations;
  counters.newton_iterations += sim.iterations;
  if (!sim.converged && has_warm_) {
    sim = simulate(assembler_, pen.hydraulic, pen.thermal, d.alpha, d.gamma,
                   nullptr);
    ++counters.simulations;
    counters.newton_iterations += sim.iterations;
  }
  if (!sim.converged && has_warm_ && z_warm_.size() == z.size()) {
    // Both the warm jump and the cold start failed; walk from the last
    // solvable design to the requested one, chaining states.  The final
    // step lands on the requested design itself.
    Eigen::VectorXd xc = x_warm_;
    const int steps = 8;
    for (int k = 1; k <= steps; ++k) {
      double t = static_cast<double>(k) / steps;
      DesignPoint dk = unpack((1.0 - t) * z_warm_ + t * z);
      PenalizedDiameters pk =
          apply_directions(dk.diameters, steepness_, problem_->catalog, beta_);
      SimulateResult step = simulate(assembler_, pk.hydraulic, pk.thermal,
                                     dk.alpha, dk.gamma, &xc);
      ++counters.simulations;
      counters.newton_iterations += step.iterations;
      if (!step.converged) break;
      xc = step.x;
      if (k == steps) sim = step;
    }
  }
  if (!sim.converged) return false;

  const Eigen::VectorXd& x = sim.x;
  x_warm_ = x;
  x_last_ = x;
  z_warm_ = z;
  has_warm_ = true;

  CostBreakdown costs = cost_model_.evaluate(x, pen.cost);
  double objective = objective_weight_ * costs.total;
  Eigen::VectorXd h = constraints_.evaluate(x);
  double raw = auglag_value(objective, h, st);
  value = raw / objective_scale_;
  ++counters.value_evals;

  if (record) {
    record->value = raw;
    record->objective = costs.total;
    record->npv = costs.npv;
    record->h = h;
    record->max_violation = std::max(0.0, h.maxCoeff());
    record->costs = costs;
    record->sim_converged = sim.converged;
    record->sim_residual = sim.residual_norm;
    record->sim_iterations = sim.iterations;
  }

  if (!grad) return true;
  ++counters.gradient_evals;

  // right-hand side dL/dx: objective part plus weighted constraint rows
  Eigen::VectorXd w = auglag_weights(h, st);
  Eigen::VectorXd dl_dx =
      objective_weight_ * cost_model_.state_gradient(x);
  dl_dx += constraints_.state_jacobian(x).transpose() * w;

  ResidualSystem sys =
      assembler_.assemble(x, pen.hydraulic, pen.thermal, d.alpha, d.gamma);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys.j_state);
  if (lu.info() != Eigen::Success) return false;
  Eigen::VectorXd psi = lu.transpose().solve(dl_dx);
  ++counters.adjoint_solves;

  int np = problem_->graph.num_pipes();
  int nop = assembler_.num_design();
  Eigen::VectorXd gd =
      objective_weight_ *
      cost_model_.diameter_gradient(pen.cost).cwiseProduct(pen.cost_d);
  gd -= (sys.j_hydraulic.transpose() * psi).cwiseProduct(pen.hydraulic_d);
  gd -= (sys.j_thermal.transpose() * psi).cwiseProduct(pen.thermal_d);
  Eigen::VectorXd gop = -(sys.j_design.transpose() * psi);

  grad->resize(num_vars());
  grad->segment(0, np) = gd;
  grad->segment(np, nop) = gop;
  grad->array() *= var_scale_.array() / objective_scale_;
  return true;
}

}  // namespace dhn
