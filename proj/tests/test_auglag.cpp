#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "dhn/auglag.hpp"
#include "instances.hpp"

using namespace dhn;

namespace {

AugLagState hand_state() {
  AugLagState st;
  st.lambda = Eigen::VectorXd(3);
  st.lambda << -2.0, 0.0, -4.0;
  st.mu = 8.0;
  return st;
}

Eigen::VectorXd hand_h() {
  Eigen::VectorXd h(3);
  h << 0.5, -0.3, -1.0;
  return h;
}

}  // namespace

TEST_CASE("slack elimination") {
  AugLagState st = hand_state();
  Eigen::VectorXd h = hand_h();
  Eigen::VectorXd s = eliminated_slack(h, st);
  Eigen::VectorXd g = augmented_constraints(h, st);
  // s is the closed-form minimizer max(0, lambda/mu - h), g = h + s
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(0.3));
  CHECK(s[2] == doctest::Approx(0.5));
  for (int i = 0; i < 3; ++i) {
    CHECK(s[i] >= 0.0);
    CHECK(g[i] == doctest::Approx(h[i] + s[i]));
    CHECK(g[i] == doctest::Approx(std::max(h[i], st.lambda[i] / st.mu)));
  }
}

TEST_CASE("augmented value on hand numbers") {
  AugLagState st = hand_state();
  Eigen::VectorXd h = hand_h();
  // g = (0.5, 0, -0.5): J - lambda'g + mu/2 g'g = J - 1 + 2
  CHECK(auglag_value(10.0, h, st) == doctest::Approx(11.0));
  // with no multipliers and penalty, the value is the objective
  AugLagState zero;
  zero.lambda = Eigen::VectorXd::Zero(3);
  zero.mu = 8.0;
  Eigen::VectorXd feas(3);
  feas << -0.1, -0.2, -0.3;
  CHECK(auglag_value(10.0, feas, zero) == doctest::Approx(10.0));
}

TEST_CASE("constraint weights are the value's h-derivative") {
  AugLagState st = hand_state();
  Eigen::VectorXd h = hand_h();
  Eigen::VectorXd w = auglag_weights(h, st);
  CHECK(w[0] == doctest::Approx(8.0 * 0.5 + 2.0));
  CHECK(w[1] == 0.0);
  CHECK(w[2] == 0.0);
  for (int i = 0; i < 3; ++i) {
    double fd = testing::fd_scalar(
        [&](double t) {
          Eigen::VectorXd hh = h;
          hh[i] = t;
          return auglag_value(0.0, hh, st);
        },
        h[i], 1e-7);
    CHECK(w[i] == doctest::Approx(fd).epsilon(1e-6));
  }
  // continuous across the active/inactive switch at h = lambda/mu
  for (double eps : {-1e-9, 1e-9}) {
    Eigen::VectorXd hh = h;
    hh[2] = st.lambda[2] / st.mu + eps;
    CHECK(std::abs(auglag_weights(hh, st)[2]) <= 1e-7);
  }
}

TEST_CASE("multiplier update") {
  AugLagState st = hand_state();
  Eigen::VectorXd h = hand_h();
  Eigen::VectorXd up = updated_multipliers(h, st);
  CHECK(up[0] == doctest::Approx(-6.0));
  CHECK(up[1] == 0.0);
  CHECK(up[2] == 0.0);
  // nonpositive and equal to min(0, lambda - mu h)
  for (int i = 0; i < 3; ++i) {
    CHECK(up[i] <= 0.0);
    CHECK(up[i] ==
          doctest::Approx(std::min(0.0, st.lambda[i] - st.mu * h[i])));
  }
}

TEST_CASE("demand band rows sum to the band width") {
  Problem p = testing::make_minimal_problem();
  p.solver.newton_tol = 1e-12;
  ReducedProblem red(p, 0.0);
  AugLagState st;
  st.lambda = Eigen::VectorXd::Zero(red.constraints().size());
  st.mu = 10.0;
  DesignPoint d;
  d.diameters = Eigen::VectorXd::Constant(2, 0.05);
  d.alpha = Eigen::VectorXd::Constant(2, 0.6);
  d.gamma = Eigen::VectorXd::Constant(1, 2e5);
  double value = 0.0;
  EvalRecord rec;
  REQUIRE(red.evaluate(red.pack(d), st, value, nullptr, &rec));
  const auto& rows = red.constraints().rows();
  REQUIRE(rec.h.size() == red.constraints().size());
  for (int i = 0; i < rec.h.size(); ++i) {
    if (rows[i].kind != ConstraintRow::Kind::DemandUpper) continue;
    for (int j = 0; j < rec.h.size(); ++j) {
      if (rows[j].kind == ConstraintRow::Kind::DemandLower &&
          rows[j].edge == rows[i].edge)
        CHECK(rec.h[i] + rec.h[j] ==
              doctest::Approx(-2.0 * p.solver.demand_margin).epsilon(1e-9));
    }
  }
}

TEST_CASE("packing is a scaled bijection over the box") {
  Problem p = testing::make_minimal_problem();
  ReducedProblem red(p, 2.0);
  CHECK(red.num_vars() == 2 + 2 + 1);
  CHECK(red.lower().size() == red.num_vars());
  CHECK(red.upper().size() == red.num_vars());
  CHECK((red.upper() - red.lower()).minCoeff() > 0.0);

  DesignPoint d;
  d.diameters = Eigen::VectorXd(2);
  d.diameters << 0.04, 0.065;
  d.alpha = Eigen::VectorXd(2);
  d.alpha << 0.3, 0.8;
  d.gamma = Eigen::VectorXd(1);
  d.gamma << 1.8e5;
  Eigen::VectorXd z = red.pack(d);
  // interior point lands inside the box
  for (int i = 0; i < z.size(); ++i) {
    CHECK(z[i] > red.lower()[i]);
    CHECK(z[i] < red.upper()[i]);
  }
  DesignPoint back = red.unpack(z);
  CHECK((back.diameters - d.diameters).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((back.alpha - d.alpha).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((back.gamma - d.gamma).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("evaluation record is internally consistent") {
  Problem p = testing::make_minimal_problem();
  p.solver.newton_tol = 1e-12;
  ReducedProblem red(p, 2.0);
  AugLagState st;
  st.lambda = Eigen::VectorXd::Constant(red.constraints().size(), -1.0);
  st.mu = 50.0;
  DesignPoint d;
  d.diameters = Eigen::VectorXd::Constant(2, 0.05);
  d.alpha = Eigen::VectorXd::Constant(2, 0.55);
  d.gamma = Eigen::VectorXd::Constant(1, 2e5);
  double value = 0.0;
  EvalRecord rec;
  REQUIRE(red.evaluate(red.pack(d), st, value, nullptr, &rec));
  CHECK(rec.sim_converged);
  CHECK(rec.value == doctest::Approx(value));  // default scale is 1
  CHECK(rec.value ==
        doctest::Approx(auglag_value(rec.objective, rec.h, st)).epsilon(1e-12));
  CHECK(rec.npv == doctest::Approx(rec.costs.npv));
  CHECK(rec.objective == doctest::Approx(rec.costs.total));
  CHECK(rec.max_violation ==
        doctest::Approx(rec.h.cwiseMax(0.0).lpNorm<Eigen::Infinity>()));
  CHECK(red.counters.value_evals > 0);
  CHECK(red.counters.simulations > 0);

  // demand mismatch agrees with the band rows being centred on it
  Eigen::VectorXd mism = red.constraints().demand_mismatch(red.last_state());
  REQUIRE(mism.size() == 1);
  const auto& rows = red.constraints().rows();
  for (int i = 0; i < rec.h.size(); ++i)
    if (rows[i].kind == ConstraintRow::Kind::DemandUpper)
      CHECK(rec.h[i] ==
            doctest::Approx(mism[0] - p.solver.demand_margin).epsilon(1e-9));
}

TEST_CASE("warm started re-evaluation is nearly free") {
  Problem p = testing::make_minimal_problem();
  ReducedProblem red(p, 2.0);
  AugLagState st;
  st.lambda = Eigen::VectorXd::Zero(red.constraints().size());
  st.mu = 10.0;
  DesignPoint d;
  d.diameters = Eigen::VectorXd::Constant(2, 0.05);
  d.alpha = Eigen::VectorXd::Constant(2, 0.6);
  d.gamma = Eigen::VectorXd::Constant(1, 2e5);
  Eigen::VectorXd z = red.pack(d);
  double v1 = 0.0, v2 = 0.0;
  EvalRecord r1, r2;
  REQUIRE(red.evaluate(z, st, v1, nullptr, &r1));
  REQUIRE(red.evaluate(z, st, v2, nullptr, &r2));
  CHECK(r2.sim_iterations <= 2);
  CHECK(v2 == doctest::Approx(v1).epsilon(1e-10));
}

TEST_CASE("adjoint gradient matches differences") {
  Problem p = testing::make_minimal_problem();
  p.solver.newton_tol = 1e-12;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.15, 0.85);
  for (double xi : {0.0, 2.0}) {
    ReducedProblem red(p, xi);
    AugLagState st;
    st.lambda = Eigen::VectorXd::Constant(red.constraints().size(), -0.5);
    st.mu = 20.0;
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXd z(red.num_vars());
      for (int i = 0; i < z.size(); ++i) {
        double t = unit(rng);
        z[i] = red.lower()[i] + t * (red.upper()[i] - red.lower()[i]);
      }
      double value = 0.0;
      Eigen::VectorXd grad;
      REQUIRE(red.evaluate(z, st, value, &grad, nullptr));
      REQUIRE(grad.size() == z.size());
      double scale = std::max(1.0, grad.lpNorm<Eigen::Infinity>());
      for (int i = 0; i < z.size(); ++i) {
        double h = 1e-6;
        Eigen::VectorXd zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        double vp = 0.0, vm = 0.0;
        REQUIRE(red.evaluate(zp, st, vp, nullptr, nullptr));
        REQUIRE(red.evaluate(zm, st, vm, nullptr, nullptr));
        double fd = (vp - vm) / (2.0 * h);
        CHECK(std::abs(grad[i] - fd) / scale <= 1e-5);
      }
    }
  }
}

TEST_CASE("freezing the diameters shrinks the variable block") {
  Problem p = testing::make_minimal_problem();
  ReducedProblem red(p, 2.0);
  REQUIRE(red.num_vars() == 5);
  Eigen::VectorXd d(2);
  d << 0.05, 0.06;
  red.freeze_diameters(d);
  CHECK(red.num_vars() == 3);

  AugLagState st;
  st.lambda = Eigen::VectorXd::Zero(red.constraints().size());
  st.mu = 10.0;
  DesignPoint dp;
  dp.alpha = Eigen::VectorXd::Constant(2, 0.5);
  dp.gamma = Eigen::VectorXd::Constant(1, 2e5);
  dp.diameters = d;  // ignored by pack when frozen
  Eigen::VectorXd z = red.pack(dp);
  REQUIRE(z.size() == 3);
  double value = 0.0;
  EvalRecord rec;
  REQUIRE(red.evaluate(z, st, value, nullptr, &rec));
  CHECK(rec.sim_converged);
  DesignPoint back = red.unpack(z);
  CHECK((back.diameters - d).lpNorm<Eigen::Infinity>() <= 1e-12);

  red.unfreeze_diameters(p);
  CHECK(red.num_vars() == 5);
}
