#pragma once

#include <Eigen/Dense>

#include "dhn/problem.hpp"

namespace dhn {

inline constexpr double kHoursPerYear = 8760.0;

// Present-value factor of a constant annual cash flow over `years` at
// `rate`: (1 - (1+rate)^-years) / rate.
double annuity_factor(double years, double rate);

// Negative net present value of one operating state.  total is the
// objective (investment plus discounted operating cost minus discounted
// revenue); npv = -total.
struct CostBreakdown {
  double pipe_capex = 0.0;
  double heat_capex = 0.0;
  double pump_capex = 0.0;
  double heat_opex_annual = 0.0;
  double pump_opex_annual = 0.0;
  double revenue_annual = 0.0;
  double annuity = 0.0;
  double total = 0.0;
  double npv = 0.0;
};

class CostModel {
 public:
  explicit CostModel(const Problem& problem);

  // d_cost holds the cost-mapped pipe diameters (graph.pipes order).
  CostBreakdown evaluate(const Eigen::VectorXd& x,
                         const Eigen::VectorXd& d_cost) const;

  // dJ/dx, dense over the state layout.
  Eigen::VectorXd state_gradient(const Eigen::VectorXd& x) const;

  // dJ/d(d_cost), one entry per pipe.
  Eigen::VectorXd diameter_gradient(const Eigen::VectorXd& d_cost) const;

  // Net heat injection per producer (graph.producer_feed order), W.
  Eigen::VectorXd producer_injection(const Eigen::VectorXd& x) const;

 private:
  const Problem* problem_;
  StateLayout layout_;
};

}  // namespace dhn
