#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "dhn/problem.hpp"

namespace dhn {

// ---- scalar kernels ----
// All smoothing widths are solver options; every kernel returns exact
// derivatives of the smoothed expression it implements.

struct Smoothed {
  double value = 0.0;
  double d = 0.0;
};

// |q| with the corner replaced by the even C1 fit q_eps/2 + q^2/(2 q_eps)
// on [-q_eps, q_eps]; strictly positive everywhere.
Smoothed regularized_abs(double q, double q_eps);

// Upwind weight: logistic sigma(q / q_eps), 1 for strong forward flow.
Smoothed upwind_weight(double q, double q_eps);

double reynolds(double q_abs, double diameter, const PhysicalParams& phys);

// Friction pressure drop f(Re) (8 rho L / (pi^2 d^5)) |q| q with the
// turbulent Blasius correlation, blended over one decade of Re into the
// laminar 64/Re law below Re = 100.  The laminar limit is analytically
// linear in q, which keeps the momentum row regular at rest.
struct FrictionDrop {
  double value = 0.0;      // Pa
  double d_flow = 0.0;     // Pa s / m^3
  double d_diameter = 0.0; // Pa / m
};
FrictionDrop friction_pressure_drop(double q, double diameter, double length,
                                    const PhysicalParams& phys, double q_eps);

// Radial resistance of ground plus insulation per unit length, K m / W.
double thermal_resistance(double diameter, const PhysicalParams& phys);
double thermal_resistance_d(double diameter, const PhysicalParams& phys);

// Outlet decay factor exp(-L / (rho cp |q| R(d))) of a buried pipe.
struct ExitFactor {
  double value = 0.0;
  double d_flow = 0.0;
  double d_diameter = 0.0;
};
ExitFactor exit_temperature_factor(double q, double diameter, double length,
                                   const PhysicalParams& phys, double q_eps);

// Chen's closed-form log-mean approximation (A B (A+B)/2)^(1/3) with
// partials; safe against underflow when both approaches collapse.
struct Lmtd {
  double value = 0.0;
  double d_a = 0.0;
  double d_b = 0.0;
};
Lmtd chen_lmtd(double a, double b);

// Softplus floor at zero with width `eps`: exact for arguments above a few
// eps, smoothly positive below.
Smoothed approach_floor(double z, double eps);

// Radiator heat flow Phi * LMTD^n over the floored approaches to the house
// temperature.  theta arguments are offsets above ambient.
struct HeaterPower {
  double value = 0.0;       // W
  double d_theta_in = 0.0;  // W/K
  double d_theta_exit = 0.0;
};
HeaterPower heater_power(double theta_in, double theta_exit,
                         const ConsumerData& consumer, double floor_eps);

// ---- assembled system ----

// Operating closure of the flow equations.  Reduced: consumer edge flows are
// prescribed (alpha q_max) and plants prescribe a pressure rise; valve drops
// move into the constraint set.  Full: consumer edges carry the explicit
// valve momentum law with an opening alpha and plants prescribe their flow.
enum class FlowModel { Reduced, Full };

struct ResidualSystem {
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> j_state;      // square
  Eigen::SparseMatrix<double> j_hydraulic;  // rows: state, cols: pipes
  Eigen::SparseMatrix<double> j_thermal;    // rows: state, cols: pipes
  Eigen::SparseMatrix<double> j_design;     // cols: alpha then gamma
};

class Assembler {
 public:
  Assembler(const Problem& problem, FlowModel model);

  const StateLayout& layout() const { return layout_; }
  const Problem& problem() const { return *problem_; }
  FlowModel model() const { return model_; }
  int num_design() const;

  // Residual plus all Jacobians at a state.  Diameter vectors are the
  // discipline-mapped pipe diameters in graph.pipes order.
  ResidualSystem assemble(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& d_hydraulic,
                          const Eigen::VectorXd& d_thermal,
                          const Eigen::VectorXd& alpha,
                          const Eigen::VectorXd& gamma) const;

  Eigen::VectorXd residual(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& d_hydraulic,
                           const Eigen::VectorXd& d_thermal,
                           const Eigen::VectorXd& alpha,
                           const Eigen::VectorXd& gamma) const;

  // Starting state for a cold solve.
  Eigen::VectorXd initial_state(const Eigen::VectorXd& alpha,
                                const Eigen::VectorXd& gamma) const;

 private:
  const Problem* problem_;
  FlowModel model_;
  StateLayout layout_;

  void assemble_impl(const Eigen::VectorXd& x, const Eigen::VectorXd& dh,
                     const Eigen::VectorXd& dt, const Eigen::VectorXd& alpha,
                     const Eigen::VectorXd& gamma, Eigen::VectorXd& c,
                     ResidualSystem* jac) const;
};

// ---- conservation reports ----

// Largest volumetric node imbalance in m^3/s (all nodes, reference included).
double max_continuity_imbalance(const Problem& p, const Eigen::VectorXd& x);

// Energy ledger of a converged state using the model's own flux convention
// (upwind-smoothed edge fluxes), in W.  closure() is the defect of
// production = delivery + losses + regularisation, which a converged state
// satisfies to rounding.
struct EnergyReport {
  double production = 0.0;
  double delivery = 0.0;
  double pipe_loss = 0.0;
  double regularization = 0.0;  // ambient leak of the mixing rows
  double closure() const {
    return production - delivery - pipe_loss - regularization;
  }
  double relative_closure() const;
};
EnergyReport energy_report(const Problem& p, const Eigen::VectorXd& x);

// Heat delivered to each consumer (graph.heating order), W.
Eigen::VectorXd delivered_heat(const Problem& p, const Eigen::VectorXd& x);

}  // namespace dhn
