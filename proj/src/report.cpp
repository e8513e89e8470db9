#include "dhn/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "dhn/io.hpp"

namespace dhn {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string stamp(const Problem& p) {
  return "# config=" + config_hash(p) + " schema=1\n";
}

}  // namespace

std::string history_csv(const Problem& p,
                        const std::vector<IterateRecord>& history) {
  std::ostringstream out;
  out << stamp(p)
      << "outer,stage,xi,inner,mu,value,objective,npv,violation,proj_grad\n";
  for (const IterateRecord& r : history) {
    out << r.outer << ',' << r.stage << ',' << fmt(r.steepness) << ','
        << r.inner_iterations << ',' << fmt(r.mu) << ',' << fmt(r.value) << ','
        << fmt(r.objective) << ',' << fmt(r.npv) << ','
        << fmt(r.max_violation) << ',' << fmt(r.proj_grad) << '\n';
  }
  return out.str();
}

std::string design_evolution_csv(const Problem& p,
                                 const std::vector<IterateRecord>& history) {
  const NetworkGraph& g = p.graph;
  std::ostringstream out;
  out << stamp(p) << "outer,stage,xi";
  for (int e : g.pipes) out << ',' << g.edges[e].id;
  out << '\n';
  for (const IterateRecord& r : history) {
    out << r.outer << ',' << r.stage << ',' << fmt(r.steepness);
    for (Eigen::Index i = 0; i < r.diameters.size(); ++i)
      out << ',' << fmt(r.diameters[i]);
    out << '\n';
  }
  return out.str();
}

std::string edges_csv(const Problem& p, const DesignPoint& d,
                      const Eigen::VectorXd& x) {
  const NetworkGraph& g = p.graph;
  StateLayout layout(g);
  std::ostringstream out;
  out << stamp(p)
      << "id,role,tail,head,length,diameter,flow,velocity,dp,theta_exit\n";
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edges[e];
    double diameter = is_pipe(ed.role) ? d.diameters[g.pipe_index[e]] : 0.0;
    double q = x[layout.flow(e)];
    double area = 0.25 * kPi * diameter * diameter;
    double velocity = area > 0.0 ? q / area : 0.0;
    double dp = x[layout.pressure(ed.tail)] - x[layout.pressure(ed.head)];
    out << ed.id << ',' << to_string(ed.role) << ',' << ed.tail_id << ','
        << ed.head_id << ',' << fmt(ed.length) << ',' << fmt(diameter) << ','
        << fmt(q) << ',' << fmt(velocity) << ',' << fmt(dp) << ','
        << fmt(x[layout.theta_exit(e)]) << '\n';
  }
  return out.str();
}

std::string consumers_csv(const Problem& p, const DesignPoint& d,
                          const Eigen::VectorXd& x) {
  const NetworkGraph& g = p.graph;
  StateLayout layout(g);
  Eigen::VectorXd delivered = delivered_heat(p, x);
  std::ostringstream out;
  out << stamp(p)
      << "id,demand,delivered,mismatch,alpha,flow,theta_feed,theta_return\n";
  for (size_t i = 0; i < g.heating.size(); ++i) {
    int e = g.heating[i];
    const Edge& ed = g.edges[e];
    double mism = (delivered[static_cast<Eigen::Index>(i)] -
                   ed.consumer.demand) /
                  ed.consumer.demand;
    out << ed.id << ',' << fmt(ed.consumer.demand) << ','
        << fmt(delivered[static_cast<Eigen::Index>(i)]) << ',' << fmt(mism)
        << ',' << fmt(d.alpha[g.consumer_index[e]]) << ','
        << fmt(x[layout.flow(e)]) << ',' << fmt(x[layout.theta_node(ed.tail)])
        << ',' << fmt(x[layout.theta_exit(e)]) << '\n';
  }
  return out.str();
}

std::string producers_csv(const Problem& p, const DesignPoint& d,
                          const Eigen::VectorXd& x) {
  const NetworkGraph& g = p.graph;
  StateLayout layout(g);
  Eigen::VectorXd injection = CostModel(p).producer_injection(x);
  double total = injection.sum();
  std::ostringstream out;
  out << stamp(p) << "id,supply_temperature_c,gamma,flow,injection,share\n";
  for (size_t i = 0; i < g.producer_feed.size(); ++i) {
    int e = g.producer_feed[i];
    const Edge& ed = g.edges[e];
    double inj = injection[static_cast<Eigen::Index>(i)];
    out << ed.id << ',' << fmt(ed.producer.supply_temperature_c) << ','
        << fmt(d.gamma[static_cast<Eigen::Index>(i)]) << ','
        << fmt(x[layout.flow(e)]) << ',' << fmt(inj) << ','
        << fmt(total > 0.0 ? inj / total : 0.0) << '\n';
  }
  return out.str();
}

std::string breakdown_csv(const Problem& p, const CostBreakdown& costs) {
  std::ostringstream out;
  out << stamp(p) << "item,value\n";
  out << "pipe_capex," << fmt(costs.pipe_capex) << '\n';
  out << "heat_capex," << fmt(costs.heat_capex) << '\n';
  out << "pump_capex," << fmt(costs.pump_capex) << '\n';
  out << "heat_opex_annual," << fmt(costs.heat_opex_annual) << '\n';
  out << "pump_opex_annual," << fmt(costs.pump_opex_annual) << '\n';
  out << "revenue_annual," << fmt(costs.revenue_annual) << '\n';
  out << "annuity," << fmt(costs.annuity) << '\n';
  out << "total," << fmt(costs.total) << '\n';
  out << "npv," << fmt(costs.npv) << '\n';
  return out.str();
}

std::string comparison_csv(const Problem& p,
                           const std::vector<CatalogOutcome>& outcomes) {
  std::ostringstream out;
  out << stamp(p)
      << "catalog,npv_penalized,npv_rounded,advantage,penalized_feasible,"
         "rounded_feasible,near_fraction\n";
  for (const CatalogOutcome& c : outcomes) {
    Problem pc = p;
    pc.catalog = c.catalog;
    Discreteness disc =
        discreteness_metric(pc, c.penalized_run.design.diameters);
    out << c.name << ',' << fmt(c.penalized.npv) << ',' << fmt(c.rounded.npv)
        << ',' << fmt(c.advantage()) << ',' << (c.penalized.feasible ? 1 : 0)
        << ',' << (c.rounded.feasible ? 1 : 0) << ',' << fmt(disc.fraction())
        << '\n';
  }
  return out.str();
}

std::string penalization_curves_csv(const Problem& p, int samples) {
  const std::vector<double>& schedule = p.solver.xi_schedule;
  std::ostringstream out;
  out << stamp(p) << "d";
  for (double xi : schedule)
    out << ",xi" << fmt(xi) << "_lower,xi" << fmt(xi) << "_upper";
  out << '\n';
  double lo = p.catalog.d_min(), hi = p.catalog.d_max();
  for (int i = 0; i < samples; ++i) {
    double d = lo + (hi - lo) * i / (samples - 1.0);
    out << fmt(d);
    for (double xi : schedule) {
      out << ','
          << fmt(penalize(d, xi, PenalBias::ToLower, p.catalog,
                          p.solver.clip_beta))
          << ','
          << fmt(penalize(d, xi, PenalBias::ToUpper, p.catalog,
                          p.solver.clip_beta));
    }
    out << '\n';
  }
  return out.str();
}

std::string summary_text(const Problem& p, const OptimizeResult& result) {
  std::ostringstream out;
  out << stamp(p);
  out << "status: " << to_string(result.status) << '\n';
  if (!result.message.empty()) out << "message: " << result.message << '\n';
  out << "objective: " << fmt(result.objective) << '\n';
  out << "npv: " << fmt(result.npv) << '\n';
  out << "max_violation: " << fmt(result.max_violation) << '\n';
  Discreteness disc = discreteness_metric(p, result.design.diameters);
  out << "pipes_kept: " << disc.pipes_kept << " of "
      << p.graph.num_pipes() << '\n';
  out << "pipes_on_catalog: " << disc.pipes_near << " ("
      << fmt(100.0 * disc.fraction()) << "%)\n";
  out << "stages:\n";
  for (const StageSummary& s : result.stages) {
    out << "  xi=" << fmt(s.steepness) << " outers=" << s.outer_iterations
        << (s.converged ? " converged" : " budget-exhausted")
        << " objective=" << fmt(s.objective)
        << " violation=" << fmt(s.max_violation) << '\n';
  }
  out << "simulations: " << result.counters.simulations << '\n';
  out << "newton_iterations: " << result.counters.newton_iterations << '\n';
  out << "adjoint_solves: " << result.counters.adjoint_solves << '\n';
  return out.str();
}

void write_run_reports(const std::string& dir, const Problem& p,
                       const OptimizeResult& result) {
  std::filesystem::create_directories(dir);
  auto path = [&](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  write_text_file(path("history.csv"), history_csv(p, result.history));
  write_text_file(path("design_evolution.csv"),
                  design_evolution_csv(p, result.history));
  if (result.state.size() > 0) {
    write_text_file(path("edges.csv"),
                    edges_csv(p, result.design, result.state));
    write_text_file(path("consumers.csv"),
                    consumers_csv(p, result.design, result.state));
    write_text_file(path("producers.csv"),
                    producers_csv(p, result.design, result.state));
  }
  write_text_file(path("breakdown.csv"), breakdown_csv(p, result.costs));
  write_text_file(path("summary.txt"), summary_text(p, result));
  write_text_file(path("design.json"),
                  serialize_design(p, result.design));
  write_text_file(path("network.json"), serialize_problem(p));
}

std::vector<GradientCheckSample> check_gradients(
    const Problem& problem, int samples, unsigned long long seed,
    const std::vector<double>& steepnesses) {
  Problem p = problem;
  p.solver.newton_tol = 1e-12;  // finite differences eat residual noise
  const NetworkGraph& g = p.graph;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u_interval(0.15, 0.85);
  std::uniform_real_distribution<double> u_alpha(0.4, 0.95);
  std::uniform_real_distribution<double> u_gamma(1.5e5, 3.5e5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<GradientCheckSample> out;
  for (int s = 0; s < samples; ++s) {
    double xi = steepnesses[s % steepnesses.size()];
    ReducedProblem red(p, xi);

    DesignPoint d;
    d.diameters.resize(g.num_pipes());
    for (Eigen::Index i = 0; i < d.diameters.size(); ++i) {
      int k = std::min(p.catalog.intervals() - 1,
                       static_cast<int>(u01(rng) * p.catalog.intervals()));
      double lo = p.catalog.grid(k), hi = p.catalog.grid(k + 1);
      d.diameters[i] = lo + u_interval(rng) * (hi - lo);
    }
    d.alpha.resize(g.consumer_edges.size());
    for (Eigen::Index i = 0; i < d.alpha.size(); ++i) d.alpha[i] = u_alpha(rng);
    d.gamma.resize(g.num_producers());
    for (Eigen::Index i = 0; i < d.gamma.size(); ++i) d.gamma[i] = u_gamma(rng);

    Eigen::VectorXd z = red.pack(d);
    AugLagState st;
    st.mu = 10.0;
    st.lambda = Eigen::VectorXd::Zero(red.constraints().size());

    GradientCheckSample row;
    row.sample = s;
    row.steepness = xi;

    double f;
    Eigen::VectorXd g_ad;
    if (!red.evaluate(z, st, f, &g_ad, nullptr)) {
      row.rel_error = std::numeric_limits<double>::infinity();
      out.push_back(row);
      continue;
    }

    Eigen::VectorXd g_fd(z.size());
    bool failed = false;
    for (Eigen::Index i = 0; i < z.size() && !failed; ++i) {
      double h = 1e-5 * std::max(1.0, std::abs(z[i]));
      Eigen::VectorXd zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      double fp, fm;
      if (!red.evaluate(zp, st, fp, nullptr, nullptr) ||
          !red.evaluate(zm, st, fm, nullptr, nullptr)) {
        failed = true;
        break;
      }
      g_fd[i] = (fp - fm) / (2.0 * h);
    }
    if (failed) {
      row.rel_error = std::numeric_limits<double>::infinity();
      out.push_back(row);
      continue;
    }

    Eigen::VectorXd diff = g_ad - g_fd;
    Eigen::Index worst;
    row.abs_error = diff.cwiseAbs().maxCoeff(&worst);
    row.worst_index = static_cast<int>(worst);
    row.fd_norm = g_fd.lpNorm<Eigen::Infinity>();
    row.rel_error = row.abs_error / std::max(row.fd_norm, 1e-12);
    out.push_back(row);
  }
  return out;
}

std::string gradient_check_csv(const Problem& p,
                               const std::vector<GradientCheckSample>& rows) {
  std::ostringstream out;
  out << stamp(p) << "sample,xi,abs_error,rel_error,fd_norm,worst_index\n";
  for (const GradientCheckSample& r : rows) {
    out << r.sample << ',' << fmt(r.steepness) << ',' << fmt(r.abs_error)
        << ',' << fmt(r.rel_error) << ',' << fmt(r.fd_norm) << ','
        << r.worst_index << '\n';
  }
  return out.str();
}

}  // namespace dhn
