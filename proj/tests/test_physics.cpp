#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "dhn/newton.hpp"
#include "dhn/physics.hpp"
#include "instances.hpp"

using namespace dhn;

namespace {

constexpr double kQEps = 1e-6;

PhysicalParams default_phys() { return PhysicalParams{}; }

// Dense finite-difference Jacobian of the assembled residual with a step
// chosen per state block: flows sit near 1e-3, pressures near 1e5 and
// temperatures near 50, so one global step would be hopeless.
Eigen::MatrixXd fd_state_jacobian(const Assembler& a, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& dh,
                                  const Eigen::VectorXd& dt,
                                  const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& gamma) {
  const StateLayout& lay = a.layout();
  auto f = [&](const Eigen::VectorXd& s) {
    return a.residual(s, dh, dt, alpha, gamma);
  };
  Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd j(f0.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    double h = 1e-9;
    if (i >= lay.pressure(0) && i < lay.theta_node(0)) h = 1e-2;
    if (i >= lay.theta_node(0)) h = 1e-4;
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    j.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

void check_columns(const Eigen::MatrixXd& an, const Eigen::MatrixXd& fd,
                   double tol) {
  REQUIRE(an.rows() == fd.rows());
  REQUIRE(an.cols() == fd.cols());
  for (int j = 0; j < an.cols(); ++j) {
    double den = std::max(1.0, an.col(j).lpNorm<Eigen::Infinity>());
    double err = (an.col(j) - fd.col(j)).lpNorm<Eigen::Infinity>() / den;
    CHECK(err <= tol);
  }
}

}  // namespace

TEST_CASE("regularized absolute value") {
  CHECK(regularized_abs(0.0, kQEps).value == kQEps / 2.0);
  CHECK(regularized_abs(2e-6, kQEps).value == 2e-6);
  CHECK(regularized_abs(-2e-6, kQEps).value == 2e-6);
  CHECK(regularized_abs(kQEps, kQEps).value == doctest::Approx(kQEps));
  // even, positive, C1
  for (double q : {-3e-6, -8e-7, -1e-7, 0.0, 2e-7, 9e-7, 4e-6}) {
    Smoothed s = regularized_abs(q, kQEps);
    CHECK(s.value > 0.0);
    CHECK(s.value == regularized_abs(-q, kQEps).value);
    double fd = testing::fd_scalar(
        [&](double t) { return regularized_abs(t, kQEps).value; }, q, 1e-11);
    CHECK(s.d == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("upwind weight is a logistic gate") {
  CHECK(upwind_weight(0.0, kQEps).value == doctest::Approx(0.5));
  CHECK(upwind_weight(1e-3, kQEps).value == doctest::Approx(1.0));
  CHECK(upwind_weight(-1e-3, kQEps).value == doctest::Approx(0.0));
  for (double q : {-2e-6, -5e-7, 0.0, 5e-7, 2e-6}) {
    Smoothed w = upwind_weight(q, kQEps);
    CHECK(w.value + upwind_weight(-q, kQEps).value == doctest::Approx(1.0));
    double fd = testing::fd_scalar(
        [&](double t) { return upwind_weight(t, kQEps).value; }, q, 1e-11);
    CHECK(w.d == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("reynolds number") {
  PhysicalParams phys = default_phys();
  // 1 l/s through DN50: 4 rho q / (pi d mu)
  CHECK(reynolds(1e-3, 0.05, phys) == doctest::Approx(5.3602e4).epsilon(1e-4));
  CHECK(reynolds(0.0, 0.05, phys) == 0.0);
}

TEST_CASE("turbulent friction drop against the Blasius closed form") {
  PhysicalParams phys = default_phys();
  FrictionDrop fr = friction_pressure_drop(1e-3, 0.05, 100.0, phys, kQEps);
  CHECK(fr.value == doctest::Approx(5302.0).epsilon(2e-3));
  // odd in q
  FrictionDrop bk = friction_pressure_drop(-1e-3, 0.05, 100.0, phys, kQEps);
  CHECK(bk.value == doctest::Approx(-fr.value).epsilon(1e-12));
  CHECK(bk.d_flow == doctest::Approx(fr.d_flow).epsilon(1e-12));
}

TEST_CASE("laminar friction drop is linear in flow") {
  PhysicalParams phys = default_phys();
  // Re ~ 80 at this flow: below the blend, pure 64/Re
  double q = 1.5e-6, d = 0.05, len = 100.0;
  CHECK(reynolds(q, d, phys) < 100.0);
  double expected = 128.0 * phys.mu * len * q / (M_PI * std::pow(d, 4));
  FrictionDrop fr = friction_pressure_drop(q, d, len, phys, kQEps);
  CHECK(fr.value == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("friction derivatives match differences") {
  PhysicalParams phys = default_phys();
  for (double q : {2e-4, 1e-3, -6e-4}) {
    for (double d : {0.03, 0.08, 0.15}) {
      FrictionDrop fr = friction_pressure_drop(q, d, 80.0, phys, kQEps);
      double fq = testing::fd_scalar(
          [&](double t) {
            return friction_pressure_drop(t, d, 80.0, phys, kQEps).value;
          },
          q, 1e-7);
      double fdm = testing::fd_scalar(
          [&](double t) {
            return friction_pressure_drop(q, t, 80.0, phys, kQEps).value;
          },
          d, 1e-7);
      CHECK(fr.d_flow == doctest::Approx(fq).epsilon(1e-5));
      CHECK(fr.d_diameter == doctest::Approx(fdm).epsilon(1e-5));
    }
  }
}

TEST_CASE("thermal resistance of a buried insulated pipe") {
  PhysicalParams phys = default_phys();
  CHECK(thermal_resistance(0.05, phys) == doctest::Approx(5.0251).epsilon(1e-3));
  // more insulation on a bigger pipe, but resistance still falls with size
  CHECK(thermal_resistance(0.02, phys) > thermal_resistance(0.1, phys));
  for (double d : {0.02, 0.05, 0.12}) {
    double fd = testing::fd_scalar(
        [&](double t) { return thermal_resistance(t, phys); }, d, 1e-7);
    CHECK(thermal_resistance_d(d, phys) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("exit temperature factor") {
  PhysicalParams phys = default_phys();
  double q = 1e-3, d = 0.05, len = 100.0;
  ExitFactor ef = exit_temperature_factor(q, d, len, phys, kQEps);
  double expected = std::exp(
      -len / (phys.volumetric_heat_capacity() * q * thermal_resistance(d, phys)));
  CHECK(ef.value == doctest::Approx(expected).epsilon(1e-9));
  CHECK(ef.value > 0.0);
  CHECK(ef.value < 1.0);
  // faster flow cools less
  CHECK(ef.d_flow > 0.0);
  for (double qq : {3e-4, 1e-3, -7e-4}) {
    ExitFactor e2 = exit_temperature_factor(qq, d, len, phys, kQEps);
    double fq = testing::fd_scalar(
        [&](double t) {
          return exit_temperature_factor(t, d, len, phys, kQEps).value;
        },
        qq, 1e-7);
    double fdm = testing::fd_scalar(
        [&](double t) {
          return exit_temperature_factor(qq, t, len, phys, kQEps).value;
        },
        d, 1e-7);
    CHECK(e2.d_flow == doctest::Approx(fq).epsilon(1e-5));
    CHECK(e2.d_diameter == doctest::Approx(fdm).epsilon(1e-5));
  }
}

TEST_CASE("chen log-mean approximation") {
  Lmtd l = chen_lmtd(50.0, 30.0);
  CHECK(l.value == doctest::Approx(39.1487).epsilon(1e-4));
  CHECK(chen_lmtd(30.0, 50.0).value == doctest::Approx(l.value));
  CHECK(chen_lmtd(40.0, 40.0).value == doctest::Approx(40.0));
  for (auto [a, b] : {std::pair{50.0, 30.0}, {12.0, 44.0}, {5.0, 5.0}}) {
    Lmtd g = chen_lmtd(a, b);
    double fa = testing::fd_scalar(
        [&](double t) { return chen_lmtd(t, b).value; }, a, 1e-7);
    double fb = testing::fd_scalar(
        [&](double t) { return chen_lmtd(a, t).value; }, b, 1e-7);
    CHECK(g.d_a == doctest::Approx(fa).epsilon(1e-6));
    CHECK(g.d_b == doctest::Approx(fb).epsilon(1e-6));
  }
}

TEST_CASE("approach floor") {
  double eps = 0.1;
  CHECK(approach_floor(5.0, eps).value == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(approach_floor(-5.0, eps).value > 0.0);
  CHECK(approach_floor(-5.0, eps).value < 1e-6);
  for (double z : {-0.3, -0.05, 0.0, 0.07, 0.4}) {
    Smoothed s = approach_floor(z, eps);
    CHECK(s.value > 0.0);
    double fd = testing::fd_scalar(
        [&](double t) { return approach_floor(t, eps).value; }, z, 1e-7);
    CHECK(s.d == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("radiator power law") {
  ConsumerData c;
  c.demand = 25000.0;
  c.radiator_coeff = 450.0;
  c.radiator_exp = 1.42;
  c.theta_house = 28.0;
  // comfortable approaches: plain Phi * LMTD^n
  HeaterPower hp = heater_power(78.0, 58.0, c, 0.1);
  double lm = chen_lmtd(50.0, 30.0).value;
  CHECK(hp.value ==
        doctest::Approx(c.radiator_coeff * std::pow(lm, c.radiator_exp))
            .epsilon(1e-9));
  for (auto [ti, te] : {std::pair{78.0, 58.0}, {60.0, 35.0}, {30.0, 28.5}}) {
    HeaterPower h = heater_power(ti, te, c, 0.1);
    double fi = testing::fd_scalar(
        [&](double t) { return heater_power(t, te, c, 0.1).value; }, ti, 1e-7);
    double fe = testing::fd_scalar(
        [&](double t) { return heater_power(ti, t, c, 0.1).value; }, te, 1e-7);
    CHECK(h.d_theta_in == doctest::Approx(fi).epsilon(1e-5));
    CHECK(h.d_theta_exit == doctest::Approx(fe).epsilon(1e-5));
  }
  // power dies smoothly when the loop runs colder than the house
  HeaterPower cold = heater_power(20.0, 15.0, c, 0.1);
  CHECK(cold.value >= 0.0);
  CHECK(cold.value < 100.0);
}

TEST_CASE("state jacobian matches differences, reduced model") {
  Problem p = testing::make_minimal_problem();
  Assembler a(p, FlowModel::Reduced);
  int np = p.graph.num_pipes();
  Eigen::VectorXd dh = Eigen::VectorXd::Constant(np, 0.05);
  Eigen::VectorXd dt = Eigen::VectorXd::Constant(np, 0.06);
  Eigen::VectorXd alpha(2), gamma(1);
  alpha << 0.3, 0.7;
  gamma << 2e5;

  SUBCASE("at the cold-start state") {
    Eigen::VectorXd x = a.initial_state(alpha, gamma);
    ResidualSystem sys = a.assemble(x, dh, dt, alpha, gamma);
    check_columns(Eigen::MatrixXd(sys.j_state),
                  fd_state_jacobian(a, x, dh, dt, alpha, gamma), 2e-5);
  }
  SUBCASE("at a converged state") {
    SimulateResult sim = simulate(a, dh, dt, alpha, gamma);
    REQUIRE(sim.converged);
    ResidualSystem sys = a.assemble(sim.x, dh, dt, alpha, gamma);
    check_columns(Eigen::MatrixXd(sys.j_state),
                  fd_state_jacobian(a, sim.x, dh, dt, alpha, gamma), 2e-5);
  }
  SUBCASE("with a reversed pipe flow") {
    Eigen::VectorXd x = a.initial_state(alpha, gamma);
    x[a.layout().flow(p.graph.edge_index("main_r"))] = -8e-4;
    x[a.layout().theta_node(0)] += 7.0;
    ResidualSystem sys = a.assemble(x, dh, dt, alpha, gamma);
    check_columns(Eigen::MatrixXd(sys.j_state),
                  fd_state_jacobian(a, x, dh, dt, alpha, gamma), 2e-5);
  }
}

TEST_CASE("state jacobian matches differences, full model") {
  Problem p = testing::make_minimal_problem();
  Assembler a(p, FlowModel::Full);
  int np = p.graph.num_pipes();
  Eigen::VectorXd dh = Eigen::VectorXd::Constant(np, 0.05);
  Eigen::VectorXd dt = Eigen::VectorXd::Constant(np, 0.05);
  Eigen::VectorXd alpha(2), gamma(1);
  alpha << 0.4, 0.6;
  gamma << 9e-4;  // prescribed plant flow in this model
  Eigen::VectorXd x = a.initial_state(alpha, gamma);
  ResidualSystem sys = a.assemble(x, dh, dt, alpha, gamma);
  check_columns(Eigen::MatrixXd(sys.j_state),
                fd_state_jacobian(a, x, dh, dt, alpha, gamma), 2e-5);
}

TEST_CASE("design and diameter jacobians match differences") {
  Problem p = testing::make_minimal_problem();
  for (FlowModel model : {FlowModel::Reduced, FlowModel::Full}) {
    Assembler a(p, model);
    int np = p.graph.num_pipes();
    Eigen::VectorXd dh = Eigen::VectorXd::Constant(np, 0.05);
    Eigen::VectorXd dt = Eigen::VectorXd::Constant(np, 0.07);
    Eigen::VectorXd alpha(2), gamma(1);
    alpha << 0.35, 0.65;
    gamma << (model == FlowModel::Reduced ? 2e5 : 9e-4);
    Eigen::VectorXd x = a.initial_state(alpha, gamma);
    x[a.layout().theta_node(1)] += 4.0;  // step off any symmetric point
    ResidualSystem sys = a.assemble(x, dh, dt, alpha, gamma);

    Eigen::MatrixXd fd_h = testing::fd_jacobian(
        [&](const Eigen::VectorXd& v) {
          return a.residual(x, v, dt, alpha, gamma);
        },
        dh, 1e-7);
    check_columns(Eigen::MatrixXd(sys.j_hydraulic), fd_h, 2e-5);

    Eigen::MatrixXd fd_t = testing::fd_jacobian(
        [&](const Eigen::VectorXd& v) {
          return a.residual(x, dh, v, alpha, gamma);
        },
        dt, 1e-7);
    check_columns(Eigen::MatrixXd(sys.j_thermal), fd_t, 2e-5);

    Eigen::VectorXd design(3);
    design << alpha, gamma;
    Eigen::MatrixXd fd_d = testing::fd_jacobian(
        [&](const Eigen::VectorXd& v) {
          return a.residual(x, dh, dt, v.head(2), v.tail(1));
        },
        design, 1e-7);
    check_columns(Eigen::MatrixXd(sys.j_design), fd_d, 2e-5);
  }
}
