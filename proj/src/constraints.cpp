#include "dhn/constraints.hpp"

#include "dhn/physics.hpp"

namespace dhn {

ConstraintSet::ConstraintSet(const Problem& problem)
    : problem_(&problem), layout_(problem.graph) {
  const NetworkGraph& g = problem.graph;
  for (int e : g.heating) {
    rows_.push_back({ConstraintRow::Kind::DemandUpper, e});
    rows_.push_back({ConstraintRow::Kind::DemandLower, e});
  }
  for (int e : g.consumer_edges)
    rows_.push_back({ConstraintRow::Kind::Valve, e});
}

Eigen::VectorXd ConstraintSet::evaluate(const Eigen::VectorXd& x) const {
  const Problem& p = *problem_;
  const NetworkGraph& g = p.graph;
  const StateLayout& L = layout_;
  double margin = p.solver.demand_margin;
  Eigen::VectorXd h(size());
  for (size_t r = 0; r < rows_.size(); ++r) {
    const ConstraintRow& row = rows_[r];
    const Edge& ed = g.edges[row.edge];
    switch (row.kind) {
      case ConstraintRow::Kind::DemandUpper:
      case ConstraintRow::Kind::DemandLower: {
        double q_heat =
            heater_power(x[L.theta_node(ed.tail)], x[L.theta_exit(row.edge)],
                         ed.consumer, p.solver.approach_floor)
                .value;
        double s = (q_heat - ed.consumer.demand) / ed.consumer.demand;
        h[r] = (row.kind == ConstraintRow::Kind::DemandUpper ? s : -s) - margin;
        break;
      }
      case ConstraintRow::Kind::Valve: {
        double dp = x[L.pressure(ed.tail)] - x[L.pressure(ed.head)];
        h[r] = (ed.zeta * x[L.flow(row.edge)] - dp) / p.solver.p_scale;
        break;
      }
    }
  }
  return h;
}

Eigen::SparseMatrix<double> ConstraintSet::state_jacobian(
    const Eigen::VectorXd& x) const {
  const Problem& p = *problem_;
  const NetworkGraph& g = p.graph;
  const StateLayout& L = layout_;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(3 * rows_.size());
  for (size_t r = 0; r < rows_.size(); ++r) {
    const ConstraintRow& row = rows_[r];
    const Edge& ed = g.edges[row.edge];
    int ri = static_cast<int>(r);
    switch (row.kind) {
      case ConstraintRow::Kind::DemandUpper:
      case ConstraintRow::Kind::DemandLower: {
        HeaterPower hp =
            heater_power(x[L.theta_node(ed.tail)], x[L.theta_exit(row.edge)],
                         ed.consumer, p.solver.approach_floor);
        double sign =
            row.kind == ConstraintRow::Kind::DemandUpper ? 1.0 : -1.0;
        double scale = sign / ed.consumer.demand;
        trip.emplace_back(ri, L.theta_node(ed.tail), scale * hp.d_theta_in);
        trip.emplace_back(ri, L.theta_exit(row.edge),
                          scale * hp.d_theta_exit);
        break;
      }
      case ConstraintRow::Kind::Valve: {
        double s = 1.0 / p.solver.p_scale;
        trip.emplace_back(ri, L.flow(row.edge), ed.zeta * s);
        trip.emplace_back(ri, L.pressure(ed.tail), -s);
        trip.emplace_back(ri, L.pressure(ed.head), s);
        break;
      }
    }
  }
  Eigen::SparseMatrix<double> jac(size(), L.size());
  jac.setFromTriplets(trip.begin(), trip.end());
  return jac;
}

Eigen::VectorXd ConstraintSet::demand_mismatch(const Eigen::VectorXd& x) const {
  const Problem& p = *problem_;
  const NetworkGraph& g = p.graph;
  const StateLayout& L = layout_;
  Eigen::VectorXd s(g.num_consumers());
  for (size_t k = 0; k < g.heating.size(); ++k) {
    int e = g.heating[k];
    const Edge& ed = g.edges[e];
    double q_heat = heater_power(x[L.theta_node(ed.tail)], x[L.theta_exit(e)],
                                 ed.consumer, p.solver.approach_floor)
                        .value;
    s[k] = (q_heat - ed.consumer.demand) / ed.consumer.demand;
  }
  return s;
}

}  // namespace dhn
