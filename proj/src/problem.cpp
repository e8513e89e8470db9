#include "dhn/problem.hpp"

#include <algorithm>
#include <cmath>

namespace dhn {

namespace {

// No district pump delivers more than ~20 bar; bounding the lift keeps the
// flow solves inside territory where they actually converge.
constexpr double kGammaMax = 2e6;  // Pa

// Opening that would meet the contracted demand with feed water at
// theta_feed: the radiator relation fixes the return approach, hence the
// water-side temperature drop and with it the flow.
double nominal_opening(const Edge& e, double theta_feed,
                       const PhysicalParams& phys) {
  const ConsumerData& c = e.consumer;
  if (c.demand <= 0.0 || e.q_max <= 0.0) return 1.0;
  double lm_star = std::pow(c.demand / c.radiator_coeff, 1.0 / c.radiator_exp);
  double a = theta_feed - c.theta_house;
  if (!(a > lm_star)) return 1.0;  // emitter saturated, open fully
  // return approach b solving (a - b) / log(a / b) = lm_star; the left side
  // grows monotonically from 0 to a as b sweeps up to a
  double lo = 1e-9 * a, hi = a * (1.0 - 1e-12);
  for (int it = 0; it < 60; ++it) {
    double b = 0.5 * (lo + hi);
    ((a - b) / std::log(a / b) > lm_star ? hi : lo) = b;
  }
  double drop = a - 0.5 * (lo + hi);
  double q = c.demand / (phys.volumetric_heat_capacity() * drop);
  return q / e.q_max;
}

}  // namespace

ValveSizing size_consumer_valve(double demand, const PhysicalParams& phys,
                                double dt_nominal, double dp_nominal) {
  ValveSizing v;
  v.q_max = demand / (phys.volumetric_heat_capacity() * dt_nominal);
  v.zeta = dp_nominal / v.q_max;
  return v;
}

// Feed estimate for sizing heuristics: hottest plant, a few kelvin lost on
// the way.
double feed_estimate(const Problem& p) {
  double theta_supply = 0.0;
  for (int idx : p.graph.producer_feed)
    theta_supply =
        std::max(theta_supply, p.graph.edges[idx].producer.supply_temperature_c -
                                   p.physical.t_ambient_c);
  return std::max(1.0, theta_supply - 5.0);
}

DesignPoint initial_design(const Problem& p) {
  const NetworkGraph& g = p.graph;
  DesignPoint d;
  d.diameters = Eigen::VectorXd::Constant(g.num_pipes(), p.catalog.d_max());

  double theta_feed = feed_estimate(p);
  d.alpha.resize(g.consumer_edges.size());
  for (size_t k = 0; k < g.consumer_edges.size(); ++k) {
    const Edge& e = g.edges[g.consumer_edges[k]];
    if (e.role == EdgeRole::HeatingSystem) {
      d.alpha[k] =
          std::clamp(nominal_opening(e, theta_feed, p.physical), 0.05, 1.0);
    } else {
      d.alpha[k] = 0.05;  // bypass barely cracked open
    }
  }
  d.gamma = Eigen::VectorXd::Constant(g.num_producers(), p.solver.gamma_init);
  return d;
}

void design_bounds(const Problem& p, Eigen::VectorXd& lower,
                   Eigen::VectorXd& upper) {
  int np = p.graph.num_pipes();
  int nc = static_cast<int>(p.graph.consumer_edges.size());
  int ns = p.graph.num_producers();
  lower.resize(np + nc + ns);
  upper.resize(np + nc + ns);
  lower.segment(0, np).setConstant(p.catalog.d_min());
  upper.segment(0, np).setConstant(p.catalog.d_max());
  // Heating systems keep a substantial minimal opening, half the flow that
  // would meet the demand under nominal feed.  The demand band rules out
  // anything below that anyway, and a starved branch goes cold, which kills
  // the constraint gradients the optimizer needs to recover it.  Bypasses
  // may close fully.
  double theta_feed = feed_estimate(p);
  for (int k = 0; k < nc; ++k) {
    const Edge& e = p.graph.edges[p.graph.consumer_edges[k]];
    lower[np + k] =
        e.role == EdgeRole::HeatingSystem
            ? std::clamp(0.5 * nominal_opening(e, theta_feed, p.physical),
                         0.05, 0.5)
            : 0.0;
  }
  upper.segment(np, nc).setConstant(1.0);
  lower.segment(np + nc, ns).setConstant(0.0);
  upper.segment(np + nc, ns).setConstant(kGammaMax);
}

}  // namespace dhn
