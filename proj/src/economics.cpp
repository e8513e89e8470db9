#include "dhn/economics.hpp"

#include <cmath>

#include "dhn/physics.hpp"

namespace dhn {

double annuity_factor(double years, double rate) {
  if (std::abs(rate) < 1e-12) return years;
  return (1.0 - std::pow(1.0 + rate, -years)) / rate;
}

namespace {

// A plant cannot install negative capacity and a pump cannot mine money
// from water pushed through it backwards; without this ramp a reversed
// producer leg books its enthalpy flux as a capex credit and the optimizer
// happily builds the short circuit. Smooth so the adjoint stays exact.
struct SoftPos {
  double value = 0.0;
  double d = 0.0;
};

SoftPos soft_positive(double w, double scale) {
  double t = w / scale;
  SoftPos out;
  if (t > 40.0) {
    out.value = w;
    out.d = 1.0;
  } else if (t < -40.0) {
    out.value = scale * std::exp(t);
    out.d = std::exp(t);
  } else {
    out.value = scale * std::log1p(std::exp(t));
    out.d = 1.0 / (1.0 + std::exp(-t));
  }
  return out;
}

constexpr double kHeatRampW = 1e3;
constexpr double kPumpRampW = 1.0;

}  // namespace

CostModel::CostModel(const Problem& problem)
    : problem_(&problem), layout_(problem.graph) {}

CostBreakdown CostModel::evaluate(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& d_cost) const {
  const Problem& p = *problem_;
  const NetworkGraph& g = p.graph;
  const StateLayout& L = layout_;
  double chi = p.physical.volumetric_heat_capacity();

  CostBreakdown out;
  out.annuity =
      annuity_factor(p.economics.horizon_years, p.economics.discount_rate);

  for (size_t i = 0; i < g.pipes.size(); ++i) {
    const Edge& ed = g.edges[g.pipes[i]];
    out.pipe_capex += (p.catalog.cost_slope * d_cost[i] +
                       0.5 * p.catalog.smoothed_offset(d_cost[i])) *
                      ed.length;
  }

  for (int e : g.producer_feed) {
    const Edge& ed = g.edges[e];
    double q = x[L.flow(e)];
    double theta_out = x[L.theta_exit(e)];
    double heat_w = soft_positive(chi * q * theta_out, kHeatRampW).value;
    out.heat_capex += ed.producer.c_heat_capex * heat_w;
    out.heat_opex_annual += ed.producer.c_heat_opex * heat_w * kHoursPerYear;

    double dp = x[L.pressure(ed.head)] - x[L.pressure(ed.tail)];
    double pump_w =
        soft_positive(dp * q / p.economics.pump_efficiency, kPumpRampW).value;
    if (p.economics.include_pump_capex)
      out.pump_capex += ed.producer.c_pump_capex * pump_w;
    out.pump_opex_annual += ed.producer.c_pump_opex * pump_w * kHoursPerYear;
  }

  for (size_t k = 0; k < g.heating.size(); ++k) {
    int e = g.heating[k];
    const Edge& ed = g.edges[e];
    double q_sold = heater_power(x[L.theta_node(ed.tail)], x[L.theta_exit(e)],
                                 ed.consumer, p.solver.approach_floor)
                        .value;
    out.revenue_annual += p.economics.c_revenue * q_sold * kHoursPerYear;
  }

  out.total = out.pipe_capex + out.heat_capex + out.pump_capex +
              out.annuity * (out.heat_opex_annual + out.pump_opex_annual -
                             out.revenue_annual);
  out.npv = -out.total;
  return out;
}

Eigen::VectorXd CostModel::state_gradient(const Eigen::VectorXd& x) const {
  const Problem& p = *problem_;
  const NetworkGraph& g = p.graph;
  const StateLayout& L = layout_;
  double chi = p.physical.volumetric_heat_capacity();
  double fop =
      annuity_factor(p.economics.horizon_years, p.economics.discount_rate);

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(L.size());

  for (int e : g.producer_feed) {
    const Edge& ed = g.edges[e];
    double q = x[L.flow(e)];
    double theta_out = x[L.theta_exit(e)];
    double c_heat = ed.producer.c_heat_capex +
                    fop * ed.producer.c_heat_opex * kHoursPerYear;
    double ramp_h = soft_positive(chi * q * theta_out, kHeatRampW).d;
    grad[L.flow(e)] += c_heat * ramp_h * chi * theta_out;
    grad[L.theta_exit(e)] += c_heat * ramp_h * chi * q;

    double c_pump = fop * ed.producer.c_pump_opex * kHoursPerYear;
    if (p.economics.include_pump_capex) c_pump += ed.producer.c_pump_capex;
    double dp = x[L.pressure(ed.head)] - x[L.pressure(ed.tail)];
    double eta = p.economics.pump_efficiency;
    double ramp_p = soft_positive(dp * q / eta, kPumpRampW).d;
    grad[L.flow(e)] += c_pump * ramp_p * dp / eta;
    grad[L.pressure(ed.head)] += c_pump * ramp_p * q / eta;
    grad[L.pressure(ed.tail)] -= c_pump * ramp_p * q / eta;
  }

  double c_rev = fop * p.economics.c_revenue * kHoursPerYear;
  for (int e : g.heating) {
    const Edge& ed = g.edges[e];
    HeaterPower hp = heater_power(x[L.theta_node(ed.tail)], x[L.theta_exit(e)],
                                  ed.consumer, p.solver.approach_floor);
    grad[L.theta_node(ed.tail)] -= c_rev * hp.d_theta_in;
    grad[L.theta_exit(e)] -= c_rev * hp.d_theta_exit;
  }
  return grad;
}

Eigen::VectorXd CostModel::diameter_gradient(
    const Eigen::VectorXd& d_cost) const {
  const Problem& p = *problem_;
  const NetworkGraph& g = p.graph;
  Eigen::VectorXd grad(g.num_pipes());
  for (size_t i = 0; i < g.pipes.size(); ++i) {
    const Edge& ed = g.edges[g.pipes[i]];
    grad[i] = (p.catalog.cost_slope +
               0.5 * p.catalog.smoothed_offset_d(d_cost[i])) *
              ed.length;
  }
  return grad;
}

Eigen::VectorXd CostModel::producer_injection(const Eigen::VectorXd& x) const {
  const Problem& p = *problem_;
  const NetworkGraph& g = p.graph;
  const StateLayout& L = layout_;
  double chi = p.physical.volumetric_heat_capacity();
  Eigen::VectorXd out(g.num_producers());
  for (size_t s = 0; s < g.producer_feed.size(); ++s) {
    int e = g.producer_feed[s];
    int ret = g.partner[e];
    double q = x[L.flow(e)];
    out[s] = chi * q * (x[L.theta_exit(e)] - x[L.theta_exit(ret)]);
  }
  return out;
}

}  // namespace dhn
