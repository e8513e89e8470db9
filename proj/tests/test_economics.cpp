#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "dhn/economics.hpp"
#include "dhn/newton.hpp"
#include "dhn/physics.hpp"
#include "instances.hpp"

using namespace dhn;

namespace {

struct Solved {
  Problem p;
  Eigen::VectorXd x;
  Eigen::VectorXd d_cost;
};

Solved solved_minimal() {
  Solved s;
  s.p = testing::make_minimal_problem();
  Assembler a(s.p, FlowModel::Reduced);
  int np = s.p.graph.num_pipes();
  Eigen::VectorXd d = Eigen::VectorXd::Constant(np, 0.05);
  Eigen::VectorXd alpha =
      Eigen::VectorXd::Constant(s.p.graph.consumer_edges.size(), 0.6);
  Eigen::VectorXd gamma = Eigen::VectorXd::Constant(1, 2e5);
  SimulateResult sim = simulate(a, d, d, alpha, gamma);
  REQUIRE(sim.converged);
  s.x = sim.x;
  s.d_cost = d;
  return s;
}

}  // namespace

TEST_CASE("annuity factor") {
  CHECK(annuity_factor(30.0, 0.05) == doctest::Approx(15.3725).epsilon(1e-5));
  CHECK(std::abs(annuity_factor(30.0, 0.05) - 15.3725) <= 1e-4);
  // degenerate rates
  CHECK(annuity_factor(30.0, 0.0) == 30.0);
  CHECK(annuity_factor(1.0, 0.05) == doctest::Approx(1.0 / 1.05));
  // longer horizons are worth more, higher rates less
  CHECK(annuity_factor(40.0, 0.05) > annuity_factor(30.0, 0.05));
  CHECK(annuity_factor(30.0, 0.08) < annuity_factor(30.0, 0.05));
}

TEST_CASE("catalog fit is the least-squares line") {
  PipeCatalog c = testing::make_minimal_problem().catalog;
  double n = c.diameters.size();
  double dm = 0.0, cm = 0.0;
  for (size_t i = 0; i < c.diameters.size(); ++i) {
    dm += c.diameters[i] / n;
    cm += c.costs[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < c.diameters.size(); ++i) {
    sxx += (c.diameters[i] - dm) * (c.diameters[i] - dm);
    sxy += (c.diameters[i] - dm) * (c.costs[i] - cm);
  }
  CHECK(c.cost_slope == doctest::Approx(sxy / sxx).epsilon(1e-12));
  CHECK(c.cost_offset ==
        doctest::Approx(cm - c.cost_slope * dm).epsilon(1e-12));

  PipeCatalog bad;
  bad.diameters = {0.05};
  bad.costs = {300.0};
  CHECK_THROWS_AS(catalog_fit(bad), ValidationError);
  bad.diameters = {0.05, 0.03};
  bad.costs = {300.0, 200.0};
  CHECK_THROWS_AS(catalog_fit(bad), ValidationError);
}

TEST_CASE("smoothed offset fades out at the void diameter") {
  PipeCatalog c = testing::make_desk_problem().catalog;
  // full fixed cost on real pipes, none on removed ones
  CHECK(c.smoothed_offset(0.1) == doctest::Approx(c.cost_offset).epsilon(1e-6));
  CHECK(std::abs(c.smoothed_offset(1e-4)) < 0.35 * std::abs(c.cost_offset));
  for (double d : {5e-4, 1e-3, 2e-3, 0.05}) {
    double fd = testing::fd_scalar(
        [&](double t) { return c.smoothed_offset(t); }, d, 1e-9);
    CHECK(c.smoothed_offset_d(d) == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("cost breakdown wiring") {
  Solved s = solved_minimal();
  CostModel cm(s.p);
  CostBreakdown b = cm.evaluate(s.x, s.d_cost);

  // pipe capex from the fitted line over both street sides
  double expect_pipe = 0.0;
  for (size_t i = 0; i < s.p.graph.pipes.size(); ++i) {
    const Edge& ed = s.p.graph.edges[s.p.graph.pipes[i]];
    expect_pipe += (s.p.catalog.cost_slope * s.d_cost[i] +
                    0.5 * s.p.catalog.smoothed_offset(s.d_cost[i])) *
                   ed.length;
  }
  CHECK(b.pipe_capex == doctest::Approx(expect_pipe).epsilon(1e-12));

  // revenue rebuilt from the delivered-heat report
  double heat_sold = delivered_heat(s.p, s.x).sum();
  CHECK(b.revenue_annual ==
        doctest::Approx(s.p.economics.c_revenue * heat_sold * kHoursPerYear)
            .epsilon(1e-9));

  // all positive on a healthy operating point
  CHECK(b.heat_capex > 0.0);
  CHECK(b.pump_capex > 0.0);
  CHECK(b.heat_opex_annual > 0.0);
  CHECK(b.pump_opex_annual > 0.0);
  CHECK(b.annuity == annuity_factor(30.0, 0.05));

  double total = b.pipe_capex + b.heat_capex + b.pump_capex +
                 b.annuity * (b.heat_opex_annual + b.pump_opex_annual -
                              b.revenue_annual);
  CHECK(b.total == doctest::Approx(total).epsilon(1e-12));
  CHECK(b.npv == -b.total);

  // production booked for capacity matches the injection report
  Eigen::VectorXd inj = cm.producer_injection(s.x);
  REQUIRE(inj.size() == 1);
  CHECK(inj[0] > 0.0);
  CHECK(inj[0] ==
        doctest::Approx(energy_report(s.p, s.x).production).epsilon(1e-9));
}

TEST_CASE("pump capacity cost can move out of the investment bracket") {
  Solved s = solved_minimal();
  CostBreakdown with = CostModel(s.p).evaluate(s.x, s.d_cost);
  Problem alt = s.p;
  alt.economics.include_pump_capex = false;
  CostBreakdown without = CostModel(alt).evaluate(s.x, s.d_cost);
  CHECK(with.pump_capex > 0.0);
  CHECK(without.pump_capex == 0.0);
  CHECK(without.total == doctest::Approx(with.total - with.pump_capex));
}

TEST_CASE("state gradient matches differences") {
  Solved s = solved_minimal();
  CostModel cm(s.p);
  StateLayout lay(s.p.graph);
  Eigen::VectorXd grad = cm.state_gradient(s.x);
  REQUIRE(grad.size() == s.x.size());
  for (int i = 0; i < s.x.size(); ++i) {
    double h = 1e-9;
    if (i >= lay.pressure(0) && i < lay.theta_node(0)) h = 1e-2;
    if (i >= lay.theta_node(0)) h = 1e-4;
    Eigen::VectorXd xp = s.x, xm = s.x;
    xp[i] += h;
    xm[i] -= h;
    double fd = (cm.evaluate(xp, s.d_cost).total -
                 cm.evaluate(xm, s.d_cost).total) /
                (2.0 * h);
    CHECK(std::abs(grad[i] - fd) <= 1e-5 * std::max(1.0, std::abs(grad[i])));
  }
}

TEST_CASE("diameter gradient matches differences") {
  Solved s = solved_minimal();
  CostModel cm(s.p);
  for (double d : {0.004, 0.02, 0.05, 0.1}) {
    Eigen::VectorXd dc = Eigen::VectorXd::Constant(s.d_cost.size(), d);
    Eigen::VectorXd grad = cm.diameter_gradient(dc);
    for (int i = 0; i < dc.size(); ++i) {
      Eigen::VectorXd dp = dc, dm = dc;
      dp[i] += 1e-8;
      dm[i] -= 1e-8;
      double fd = (cm.evaluate(s.x, dp).total - cm.evaluate(s.x, dm).total) /
                  2e-8;
      CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("reversed plant flow cannot mine capex credit") {
  Solved s = solved_minimal();
  StateLayout lay(s.p.graph);
  int sup = s.p.graph.edge_index("plant_sup");
  CostModel cm(s.p);

  Eigen::VectorXd x = s.x;
  x[lay.flow(sup)] = -x[lay.flow(sup)];
  CostBreakdown rev = cm.evaluate(x, s.d_cost);
  // a backwards pump books (almost) nothing instead of a negative bill
  CHECK(rev.heat_capex >= 0.0);
  CHECK(rev.heat_capex < 1.0);
  CHECK(rev.heat_opex_annual >= 0.0);
  CHECK(rev.pump_opex_annual < 1.0);

  // the clamp is smooth: gradient still matches differences right in the
  // transition region around zero thermal power
  Eigen::VectorXd xz = s.x;
  xz[lay.flow(sup)] = 1e-7;
  Eigen::VectorXd grad = cm.state_gradient(xz);
  for (int i : {lay.flow(sup), lay.theta_exit(sup),
                lay.pressure(s.p.graph.edges[sup].head)}) {
    double h = (i == lay.flow(sup)) ? 1e-11 : 1e-4;
    if (i >= lay.pressure(0) && i < lay.theta_node(0)) h = 1e-3;
    Eigen::VectorXd xp = xz, xm = xz;
    xp[i] += h;
    xm[i] -= h;
    double fd = (cm.evaluate(xp, s.d_cost).total -
                 cm.evaluate(xm, s.d_cost).total) /
                (2.0 * h);
    CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-4));
  }
}
