#include "dhn/physics.hpp"

#include <cmath>

namespace dhn {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kBlasius = 0.3164;
constexpr double kReLaminar = 100.0;    // fully laminar below
constexpr double kReTurbulent = 1000.0; // fully Blasius above (one decade)
}  // namespace

Smoothed regularized_abs(double q, double q_eps) {
  if (q >= q_eps) return {q, 1.0};
  if (q <= -q_eps) return {-q, -1.0};
  return {0.5 * q_eps + 0.5 * q * q / q_eps, q / q_eps};
}

Smoothed upwind_weight(double q, double q_eps) {
  double t = q / q_eps;
  // branch on sign for a stable logistic
  if (t >= 0.0) {
    double e = std::exp(-t);
    double s = 1.0 / (1.0 + e);
    return {s, s * s * e / q_eps};
  }
  double e = std::exp(t);
  double s = e / (1.0 + e);
  return {s, s * (1.0 - s) / q_eps};
}

double reynolds(double q_abs, double diameter, const PhysicalParams& phys) {
  return 4.0 * phys.rho * q_abs / (kPi * phys.mu * diameter);
}

FrictionDrop friction_pressure_drop(double q, double diameter, double length,
                                    const PhysicalParams& phys, double q_eps) {
  Smoothed qa = regularized_abs(q, q_eps);
  double d = diameter;
  double re = reynolds(qa.value, d, phys);
  double dre_dq = 4.0 * phys.rho * qa.d / (kPi * phys.mu * d);
  double dre_dd = -re / d;

  // laminar limit: (64/Re) K |q| q collapses to c_lam q exactly
  double c_lam = 128.0 * phys.mu * length / (kPi * d * d * d * d);
  double lam = c_lam * q;
  double dlam_dq = c_lam;
  double dlam_dd = -4.0 * lam / d;

  if (re <= kReLaminar)
    return {lam, dlam_dq, dlam_dd};

  double k = 8.0 * phys.rho * length / (kPi * kPi * d * d * d * d * d);
  double a = k * qa.value * q;
  double da_dq = k * (qa.d * q + qa.value);
  double da_dd = -5.0 * a / d;
  double fb = kBlasius * std::pow(re, -0.25);
  double dfb_dre = -0.25 * fb / re;
  double blas = fb * a;
  double dblas_dq = dfb_dre * dre_dq * a + fb * da_dq;
  double dblas_dd = dfb_dre * dre_dd * a + fb * da_dd;

  if (re >= kReTurbulent)
    return {blas, dblas_dq, dblas_dd};

  double span = std::log10(kReTurbulent / kReLaminar);
  double u = std::log10(re / kReLaminar) / span;
  double s = u * u * (3.0 - 2.0 * u);
  double ds_du = 6.0 * u * (1.0 - u);
  double ds_dre = ds_du / (span * re * std::log(10.0));

  return {s * blas + (1.0 - s) * lam,
          s * dblas_dq + (1.0 - s) * dlam_dq + ds_dre * dre_dq * (blas - lam),
          s * dblas_dd + (1.0 - s) * dlam_dd + ds_dre * dre_dd * (blas - lam)};
}

double thermal_resistance(double diameter, const PhysicalParams& phys) {
  return std::log(4.0 * phys.burial_depth / (phys.casing_ratio * diameter)) /
             (2.0 * kPi * phys.lambda_ground) +
         std::log(phys.casing_ratio) / (2.0 * kPi * phys.lambda_insulation);
}

double thermal_resistance_d(double diameter, const PhysicalParams& phys) {
  return -1.0 / (2.0 * kPi * phys.lambda_ground * diameter);
}

ExitFactor exit_temperature_factor(double q, double diameter, double length,
                                   const PhysicalParams& phys, double q_eps) {
  Smoothed qa = regularized_abs(q, q_eps);
  double r = thermal_resistance(diameter, phys);
  double c = phys.volumetric_heat_capacity();
  double expo = -length / (c * qa.value * r);
  double e = std::exp(expo);
  ExitFactor out;
  out.value = e;
  out.d_flow = e * length / (c * qa.value * qa.value * r) * qa.d;
  out.d_diameter =
      e * length / (c * qa.value * r * r) * thermal_resistance_d(diameter, phys);
  return out;
}

Lmtd chen_lmtd(double a, double b) {
  double prod = a * b * 0.5 * (a + b);
  if (prod < 1e-290) return {std::cbrt(std::max(prod, 0.0)), 0.0, 0.0};
  double v = std::cbrt(prod);
  return {v, v / 3.0 * (1.0 / a + 1.0 / (a + b)),
          v / 3.0 * (1.0 / b + 1.0 / (a + b))};
}

Smoothed approach_floor(double z, double eps) {
  double t = z / eps;
  if (t > 0.0) {
    double e = std::exp(-t);
    return {z + eps * std::log1p(e), 1.0 / (1.0 + e)};
  }
  double e = std::exp(t);
  return {eps * std::log1p(e), e / (1.0 + e)};
}

HeaterPower heater_power(double theta_in, double theta_exit,
                         const ConsumerData& consumer, double floor_eps) {
  Smoothed a = approach_floor(theta_in - consumer.theta_house, floor_eps);
  Smoothed b = approach_floor(theta_exit - consumer.theta_house, floor_eps);
  Lmtd l = chen_lmtd(a.value, b.value);
  double n = consumer.radiator_exp;
  HeaterPower out;
  if (l.value <= 0.0) return out;
  double p = consumer.radiator_coeff * std::pow(l.value, n);
  out.value = p;
  double common = consumer.radiator_coeff * n * std::pow(l.value, n - 1.0);
  out.d_theta_in = common * l.d_a * a.d;
  out.d_theta_exit = common * l.d_b * b.d;
  return out;
}

// ---- assembler ----

Assembler::Assembler(const Problem& problem, FlowModel model)
    : problem_(&problem), model_(model), layout_(problem.graph) {}

int Assembler::num_design() const {
  return static_cast<int>(problem_->graph.consumer_edges.size()) +
         problem_->graph.num_producers();
}

namespace {

struct TripletSink {
  std::vector<Eigen::Triplet<double>>* state = nullptr;
  std::vector<Eigen::Triplet<double>>* hyd = nullptr;
  std::vector<Eigen::Triplet<double>>* th = nullptr;
  std::vector<Eigen::Triplet<double>>* design = nullptr;
  void add_state(int r, int c, double v) {
    if (state) state->emplace_back(r, c, v);
  }
  void add_hyd(int r, int c, double v) {
    if (hyd) hyd->emplace_back(r, c, v);
  }
  void add_th(int r, int c, double v) {
    if (th) th->emplace_back(r, c, v);
  }
  void add_design(int r, int c, double v) {
    if (design) design->emplace_back(r, c, v);
  }
};

}  // namespace

void Assembler::assemble_impl(const Eigen::VectorXd& x,
                              const Eigen::VectorXd& dh,
                              const Eigen::VectorXd& dt,
                              const Eigen::VectorXd& alpha,
                              const Eigen::VectorXd& gamma, Eigen::VectorXd& c,
                              ResidualSystem* jac) const {
  const NetworkGraph& g = problem_->graph;
  const PhysicalParams& phys = problem_->physical;
  const SolverOptions& opt = problem_->solver;
  const StateLayout& L = layout_;
  double qs = opt.q_scale, ps = opt.p_scale, ts = opt.theta_scale;
  double pow_s = phys.volumetric_heat_capacity() * qs * ts;
  double q_eps = opt.q_eps;

  c.setZero(L.size());
  std::vector<Eigen::Triplet<double>> t_state, t_hyd, t_th, t_design;
  TripletSink sink;
  if (jac) {
    t_state.reserve(12 * L.size());
    sink.state = &t_state;
    sink.hyd = &t_hyd;
    sink.th = &t_th;
    sink.design = &t_design;
  }

  // mass balance rows (reference node carries the gauge equation instead)
  for (int n = 0; n < g.num_nodes(); ++n) {
    int row = L.row_mass(n);
    if (n == g.reference_node) {
      c[row] = (x[L.pressure(n)] - opt.reference_pressure) / ps;
      sink.add_state(row, L.pressure(n), 1.0 / ps);
      continue;
    }
    double acc = 0.0;
    for (int e : g.in_edges[n])
      if (g.edges[e].counts_at_head()) {
        acc += x[L.flow(e)];
        sink.add_state(row, L.flow(e), 1.0 / qs);
      }
    for (int e : g.out_edges[n])
      if (g.edges[e].counts_at_tail()) {
        acc -= x[L.flow(e)];
        sink.add_state(row, L.flow(e), -1.0 / qs);
      }
    c[row] = acc / qs;
  }

  // flow / momentum rows
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edges[e];
    int row = L.row_momentum(e);
    double q = x[L.flow(e)];
    switch (ed.role) {
      case EdgeRole::PipeFeed:
      case EdgeRole::PipeReturn: {
        int p = g.pipe_index[e];
        FrictionDrop fr =
            friction_pressure_drop(q, dh[p], ed.length, phys, q_eps);
        c[row] =
            (x[L.pressure(ed.tail)] - x[L.pressure(ed.head)] - fr.value) / ps;
        sink.add_state(row, L.pressure(ed.tail), 1.0 / ps);
        sink.add_state(row, L.pressure(ed.head), -1.0 / ps);
        sink.add_state(row, L.flow(e), -fr.d_flow / ps);
        sink.add_hyd(row, p, -fr.d_diameter / ps);
        break;
      }
      case EdgeRole::HeatingSystem:
      case EdgeRole::Bypass: {
        int k = g.consumer_index[e];
        if (model_ == FlowModel::Reduced) {
          c[row] = (q - alpha[k] * ed.q_max) / qs;
          sink.add_state(row, L.flow(e), 1.0 / qs);
          sink.add_design(row, k, -ed.q_max / qs);
        } else {
          // valve law dp = zeta q / alpha with the opening as a design input
          double a = std::max(alpha[k], 1e-6);
          c[row] = (x[L.pressure(ed.tail)] - x[L.pressure(ed.head)] -
                    ed.zeta * q / a) /
                   ps;
          sink.add_state(row, L.pressure(ed.tail), 1.0 / ps);
          sink.add_state(row, L.pressure(ed.head), -1.0 / ps);
          sink.add_state(row, L.flow(e), -ed.zeta / a / ps);
          sink.add_design(row, k, ed.zeta * q / (a * a) / ps);
        }
        break;
      }
      case EdgeRole::ProducerFeed: {
        int s = g.producer_index[e];
        int col = static_cast<int>(g.consumer_edges.size()) + s;
        if (model_ == FlowModel::Reduced) {
          c[row] = (x[L.pressure(ed.head)] - x[L.pressure(ed.tail)] -
                    gamma[s]) /
                   ps;
          sink.add_state(row, L.pressure(ed.head), 1.0 / ps);
          sink.add_state(row, L.pressure(ed.tail), -1.0 / ps);
          sink.add_design(row, col, -1.0 / ps);
        } else {
          c[row] = (q - gamma[s]) / qs;
          sink.add_state(row, L.flow(e), 1.0 / qs);
          sink.add_design(row, col, -1.0 / qs);
        }
        break;
      }
      case EdgeRole::ProducerReturn: {
        int feed = g.partner[e];
        c[row] = (q - x[L.flow(feed)]) / qs;
        sink.add_state(row, L.flow(e), 1.0 / qs);
        sink.add_state(row, L.flow(feed), -1.0 / qs);
        break;
      }
    }
  }

  // thermal balance rows (upwind-smoothed mixing with ambient leak gate)
  for (int n = 0; n < g.num_nodes(); ++n) {
    int row = L.row_energy_node(n);
    double theta_n = x[L.theta_node(n)];
    double acc = 0.0;
    double gate = 0.0;  // sum of regularized |q| over counted edges
    double dthn = 0.0;  // d acc / d theta_n

    auto handle = [&](int e, bool incoming) {
      double q = x[L.flow(e)];
      double theta_e = x[L.theta_exit(e)];
      Smoothed w = upwind_weight(q, q_eps);
      double sign = incoming ? 1.0 : -1.0;
      // incoming: q w theta_e + q (1-w) theta_n  (upwind from the edge)
      // outgoing: q w theta_n + q (1-w) theta_e  (upwind from the node)
      double up = incoming ? theta_e : theta_n;
      double dn = incoming ? theta_n : theta_e;
      acc += sign * (q * w.value * up + q * (1.0 - w.value) * dn);
      double dq = w.value * up + q * w.d * up + (1.0 - w.value) * dn -
                  q * w.d * dn;
      sink.add_state(row, L.flow(e), sign * dq / (qs * ts));
      double d_up = sign * q * w.value;
      double d_dn = sign * q * (1.0 - w.value);
      if (incoming) {
        sink.add_state(row, L.theta_exit(e), d_up / (qs * ts));
        dthn += d_dn;
      } else {
        sink.add_state(row, L.theta_exit(e), d_dn / (qs * ts));
        dthn += d_up;
      }
      gate += regularized_abs(q, q_eps).value;
    };

    for (int e : g.in_edges[n])
      if (g.edges[e].counts_at_head()) handle(e, true);
    for (int e : g.out_edges[n])
      if (g.edges[e].counts_at_tail()) handle(e, false);

    // leak q_eps exp(-gate/q_eps) theta_n: pins dead nodes to ambient,
    // numerically absent once any incident flow exceeds a few q_eps
    double leak = q_eps * std::exp(-gate / q_eps);
    acc -= leak * theta_n;
    dthn -= leak;
    if (jac && leak > 0.0) {
      for (int e : g.in_edges[n])
        if (g.edges[e].counts_at_head())
          sink.add_state(row, L.flow(e),
                         theta_n * leak *
                             regularized_abs(x[L.flow(e)], q_eps).d / q_eps /
                             (qs * ts));
      for (int e : g.out_edges[n])
        if (g.edges[e].counts_at_tail())
          sink.add_state(row, L.flow(e),
                         theta_n * leak *
                             regularized_abs(x[L.flow(e)], q_eps).d / q_eps /
                             (qs * ts));
    }
    sink.add_state(row, L.theta_node(n), dthn / (qs * ts));
    c[row] = acc / (qs * ts);
  }

  // exit temperature rows; the upstream end follows the flow sign so
  // reversed pipes still present the water they actually carry
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edges[e];
    int row = L.row_energy_edge(e);
    double q = x[L.flow(e)];
    double theta_e = x[L.theta_exit(e)];
    double theta_tail = x[L.theta_node(ed.tail)];
    double theta_head = x[L.theta_node(ed.head)];
    Smoothed w = upwind_weight(q, q_eps);
    double theta_up = w.value * theta_tail + (1.0 - w.value) * theta_head;
    switch (ed.role) {
      case EdgeRole::PipeFeed:
      case EdgeRole::PipeReturn: {
        int p = g.pipe_index[e];
        ExitFactor f =
            exit_temperature_factor(q, dt[p], ed.length, phys, q_eps);
        c[row] = (theta_e - theta_up * f.value) / ts;
        sink.add_state(row, L.theta_exit(e), 1.0 / ts);
        sink.add_state(row, L.theta_node(ed.tail), -f.value * w.value / ts);
        sink.add_state(row, L.theta_node(ed.head),
                       -f.value * (1.0 - w.value) / ts);
        sink.add_state(row, L.flow(e),
                       (-theta_up * f.d_flow -
                        f.value * w.d * (theta_tail - theta_head)) /
                           ts);
        sink.add_th(row, p, -theta_up * f.d_diameter / ts);
        break;
      }
      case EdgeRole::HeatingSystem: {
        HeaterPower hp = heater_power(theta_tail, theta_e, ed.consumer,
                                      opt.approach_floor);
        double chi = phys.volumetric_heat_capacity();
        c[row] = (chi * q * (theta_tail - theta_e) - hp.value) / pow_s;
        sink.add_state(row, L.flow(e), chi * (theta_tail - theta_e) / pow_s);
        sink.add_state(row, L.theta_node(ed.tail),
                       (chi * q - hp.d_theta_in) / pow_s);
        sink.add_state(row, L.theta_exit(e),
                       (-chi * q - hp.d_theta_exit) / pow_s);
        break;
      }
      case EdgeRole::Bypass:
      case EdgeRole::ProducerReturn: {
        c[row] = (theta_e - theta_up) / ts;
        sink.add_state(row, L.theta_exit(e), 1.0 / ts);
        sink.add_state(row, L.theta_node(ed.tail), -w.value / ts);
        sink.add_state(row, L.theta_node(ed.head), -(1.0 - w.value) / ts);
        sink.add_state(row, L.flow(e),
                       -w.d * (theta_tail - theta_head) / ts);
        break;
      }
      case EdgeRole::ProducerFeed: {
        double supply =
            ed.producer.supply_temperature_c - phys.t_ambient_c;
        c[row] = (theta_e - supply) / ts;
        sink.add_state(row, L.theta_exit(e), 1.0 / ts);
        break;
      }
    }
  }

  if (jac) {
    jac->c = c;
    jac->j_state.resize(L.size(), L.size());
    jac->j_state.setFromTriplets(t_state.begin(), t_state.end());
    jac->j_hydraulic.resize(L.size(), g.num_pipes());
    jac->j_hydraulic.setFromTriplets(t_hyd.begin(), t_hyd.end());
    jac->j_thermal.resize(L.size(), g.num_pipes());
    jac->j_thermal.setFromTriplets(t_th.begin(), t_th.end());
    jac->j_design.resize(L.size(), num_design());
    jac->j_design.setFromTriplets(t_design.begin(), t_design.end());
  }
}

ResidualSystem Assembler::assemble(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& dh,
                                   const Eigen::VectorXd& dt,
                                   const Eigen::VectorXd& alpha,
                                   const Eigen::VectorXd& gamma) const {
  ResidualSystem sys;
  Eigen::VectorXd c;
  assemble_impl(x, dh, dt, alpha, gamma, c, &sys);
  return sys;
}

Eigen::VectorXd Assembler::residual(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& dh,
                                    const Eigen::VectorXd& dt,
                                    const Eigen::VectorXd& alpha,
                                    const Eigen::VectorXd& gamma) const {
  Eigen::VectorXd c;
  assemble_impl(x, dh, dt, alpha, gamma, c, nullptr);
  return c;
}

Eigen::VectorXd Assembler::initial_state(const Eigen::VectorXd& alpha,
                                         const Eigen::VectorXd& gamma) const {
  const NetworkGraph& g = problem_->graph;
  const StateLayout& L = layout_;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(L.size());

  double total = 0.0;
  for (size_t k = 0; k < g.consumer_edges.size(); ++k) {
    int e = g.consumer_edges[k];
    double q = alpha[k] * g.edges[e].q_max;
    x[L.flow(e)] = q;
    total += q;
  }
  double per_plant = g.num_producers() > 0 ? total / g.num_producers() : 0.0;
  for (int e : g.producer_feed) x[L.flow(e)] = per_plant;
  for (int e : g.producer_return) x[L.flow(e)] = per_plant;

  // Route the prescribed flows through a spanning forest of the pipe
  // subgraph (chords stay at rest).  A mass-consistent start keeps the
  // mixing rows regular: a node fed without outflow would otherwise lose
  // its temperature equation.
  std::vector<double> resid(g.num_nodes(), 0.0);
  for (int e = 0; e < g.num_edges(); ++e) {
    if (is_pipe(g.edges[e].role)) continue;
    double q = x[L.flow(e)];
    if (g.edges[e].counts_at_tail()) resid[g.edges[e].tail] -= q;
    if (g.edges[e].counts_at_head()) resid[g.edges[e].head] += q;
  }
  std::vector<int> parent_edge(g.num_nodes(), -1);
  std::vector<int> order;
  std::vector<char> seen(g.num_nodes(), 0);
  for (int root = 0; root < g.num_nodes(); ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    order.push_back(root);
    for (size_t head = order.size() - 1; head < order.size(); ++head) {
      int n = order[head];
      auto visit = [&](int e, int m) {
        if (!is_pipe(g.edges[e].role) || seen[m]) return;
        seen[m] = 1;
        parent_edge[m] = e;
        order.push_back(m);
      };
      for (int e : g.out_edges[n]) visit(e, g.edges[e].head);
      for (int e : g.in_edges[n]) visit(e, g.edges[e].tail);
    }
  }
  for (size_t i = order.size(); i-- > 0;) {
    int n = order[i];
    int e = parent_edge[n];
    if (e < 0) continue;  // forest root keeps any leftover imbalance
    if (g.edges[e].head == n) {
      x[L.flow(e)] = -resid[n];
      resid[g.edges[e].tail] += resid[n];
    } else {
      x[L.flow(e)] = resid[n];
      resid[g.edges[e].head] += resid[n];
    }
  }

  // Hot start once anything flows; the rest state is left cold so it stays
  // an exact root of the thermal rows.
  double theta0 = 0.0;
  if (total > 0.0)
    for (int e : g.producer_feed)
      theta0 = std::max(theta0, g.edges[e].producer.supply_temperature_c -
                                    problem_->physical.t_ambient_c);
  for (int n = 0; n < g.num_nodes(); ++n) x[L.theta_node(n)] = theta0;
  for (int e = 0; e < g.num_edges(); ++e) x[L.theta_exit(e)] = theta0;
  if (total > 0.0)
    for (int e : g.producer_feed)
      x[L.theta_exit(e)] = g.edges[e].producer.supply_temperature_c -
                           problem_->physical.t_ambient_c;
  (void)gamma;
  return x;
}

// ---- conservation ----

double max_continuity_imbalance(const Problem& p, const Eigen::VectorXd& x) {
  const NetworkGraph& g = p.graph;
  StateLayout L(g);
  double worst = 0.0;
  for (int n = 0; n < g.num_nodes(); ++n) {
    double acc = 0.0;
    for (int e : g.in_edges[n])
      if (g.edges[e].counts_at_head()) acc += x[L.flow(e)];
    for (int e : g.out_edges[n])
      if (g.edges[e].counts_at_tail()) acc -= x[L.flow(e)];
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

namespace {

// Energy flux carried into (tail end) and out of (head end) an edge under
// the mixing rows' upwind convention, W.
struct EdgeFlux {
  double in = 0.0;
  double out = 0.0;
};

EdgeFlux edge_flux(const Problem& p, const Eigen::VectorXd& x, int e) {
  const NetworkGraph& g = p.graph;
  StateLayout L(g);
  const Edge& ed = g.edges[e];
  double chi = p.physical.volumetric_heat_capacity();
  double q = x[L.flow(e)];
  double w = upwind_weight(q, p.solver.q_eps).value;
  double theta_e = x[L.theta_exit(e)];
  EdgeFlux f;
  double theta_tail = x[L.theta_node(ed.tail)];
  double theta_head = x[L.theta_node(ed.head)];
  f.in = chi * (q * w * theta_tail + q * (1.0 - w) * theta_e);
  f.out = chi * (q * w * theta_e + q * (1.0 - w) * theta_head);
  return f;
}

}  // namespace

EnergyReport energy_report(const Problem& p, const Eigen::VectorXd& x) {
  const NetworkGraph& g = p.graph;
  StateLayout L(g);
  EnergyReport rep;
  double chi = p.physical.volumetric_heat_capacity();
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edges[e];
    EdgeFlux f = edge_flux(p, x, e);
    switch (ed.role) {
      case EdgeRole::PipeFeed:
      case EdgeRole::PipeReturn:
      case EdgeRole::Bypass:
        rep.pipe_loss += f.in - f.out;
        break;
      case EdgeRole::HeatingSystem:
        rep.delivery += f.in - f.out;
        break;
      case EdgeRole::ProducerFeed:
        rep.production += f.out;  // counted at the feed node only
        break;
      case EdgeRole::ProducerReturn:
        rep.production -= f.in;  // water handed back to the plant
        break;
    }
  }
  for (int n = 0; n < g.num_nodes(); ++n) {
    double gate = 0.0;
    for (int e : g.in_edges[n])
      if (g.edges[e].counts_at_head())
        gate += regularized_abs(x[L.flow(e)], p.solver.q_eps).value;
    for (int e : g.out_edges[n])
      if (g.edges[e].counts_at_tail())
        gate += regularized_abs(x[L.flow(e)], p.solver.q_eps).value;
    double leak = p.solver.q_eps * std::exp(-gate / p.solver.q_eps);
    rep.regularization += chi * leak * x[L.theta_node(n)];
  }
  return rep;
}

double EnergyReport::relative_closure() const {
  double scale = std::max({std::abs(production), std::abs(delivery), 1.0});
  return std::abs(closure()) / scale;
}

Eigen::VectorXd delivered_heat(const Problem& p, const Eigen::VectorXd& x) {
  const NetworkGraph& g = p.graph;
  StateLayout L(g);
  Eigen::VectorXd out(g.num_consumers());
  for (size_t k = 0; k < g.heating.size(); ++k) {
    const Edge& ed = g.edges[g.heating[k]];
    out[k] = heater_power(x[L.theta_node(ed.tail)],
                          x[L.theta_exit(g.heating[k])], ed.consumer,
                          p.solver.approach_floor)
                 .value;
  }
  return out;
}

}  // namespace dhn
