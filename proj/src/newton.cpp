#include "dhn/newton.hpp"

#include <Eigen/SparseLU>
#include <cmath>

namespace dhn {

namespace {

void block_norms(const Assembler& as, const Eigen::VectorXd& c,
                 SimulateResult& out) {
  const StateLayout& L = as.layout();
  auto seg_norm = [&](int begin, int len) {
    double m = 0.0;
    for (int i = 0; i < len; ++i) m = std::max(m, std::abs(c[begin + i]));
    return m;
  };
  out.block_mass = seg_norm(0, L.n_nodes);
  out.block_momentum = seg_norm(L.n_nodes, L.n_edges);
  out.block_thermal_node = seg_norm(L.n_nodes + L.n_edges, L.n_nodes);
  out.block_thermal_edge = seg_norm(2 * L.n_nodes + L.n_edges, L.n_edges);
}

}  // namespace

SimulateResult simulate(const Assembler& as, const Eigen::VectorXd& dh,
                        const Eigen::VectorXd& dt, const Eigen::VectorXd& alpha,
                        const Eigen::VectorXd& gamma,
                        const Eigen::VectorXd* x0) {
  const SolverOptions& opt = as.problem().solver;
  SimulateResult out;
  Eigen::VectorXd x = x0 ? *x0 : as.initial_state(alpha, gamma);

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::VectorXd c = as.residual(x, dh, dt, alpha, gamma);
  double cnorm2 = c.norm();
  out.residual_history.push_back(c.lpNorm<Eigen::Infinity>());

  for (int it = 0; it < opt.newton_max_iter; ++it) {
    double cinf = c.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(cinf)) {
      out.reason = "residual not finite";
      break;
    }
    if (cinf <= opt.newton_tol) {
      out.converged = true;
      out.reason = "converged";
      break;
    }

    ResidualSystem sys = as.assemble(x, dh, dt, alpha, gamma);
    lu.compute(sys.j_state);
    Eigen::VectorXd step;
    if (lu.info() == Eigen::Success) step = lu.solve(-c);
    if (lu.info() != Eigen::Success || !step.allFinite()) {
      // Numerically singular at this iterate (void pipes put friction slopes
      // many orders above the thermal entries).  Retry with growing diagonal
      // damping; an inexact descent direction is enough for the line search.
      double base = 0.0;
      for (int k = 0; k < sys.j_state.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it2(sys.j_state, k);
             it2; ++it2)
          base = std::max(base, std::abs(it2.value()));
      Eigen::SparseMatrix<double> ident(sys.j_state.rows(),
                                        sys.j_state.cols());
      ident.setIdentity();
      bool solved = false;
      for (double damp = 1e-14 * base; damp <= 1e-2 * base; damp *= 100.0) {
        Eigen::SparseMatrix<double> jd = sys.j_state + damp * ident;
        lu.compute(jd);
        if (lu.info() != Eigen::Success) continue;
        step = lu.solve(-c);
        if (step.allFinite()) {
          solved = true;
          break;
        }
      }
      if (!solved) {
        out.reason = "jacobian factorization failed";
        break;
      }
    }

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls <= opt.newton_max_backtracks; ++ls) {
      Eigen::VectorXd trial = x + t * step;
      Eigen::VectorXd ct = as.residual(trial, dh, dt, alpha, gamma);
      double tnorm2 = ct.norm();
      if (std::isfinite(tnorm2) && tnorm2 <= (1.0 - 1e-4 * t) * cnorm2) {
        x = trial;
        c = ct;
        cnorm2 = tnorm2;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    out.iterations = it + 1;
    out.residual_history.push_back(c.lpNorm<Eigen::Infinity>());
    if (!accepted) {
      out.reason = "line search failed";
      break;
    }
  }

  if (!out.converged && out.reason.empty()) out.reason = "iteration budget";
  out.x = x;
  out.residual_norm = c.lpNorm<Eigen::Infinity>();
  if (out.residual_norm <= opt.newton_tol) {
    out.converged = true;
    out.reason = "converged";
  }
  block_norms(as, c, out);
  return out;
}

}  // namespace dhn
