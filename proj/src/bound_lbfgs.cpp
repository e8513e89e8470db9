#include "dhn/bound_lbfgs.hpp"

#include <cmath>
#include <deque>

namespace dhn {

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& z, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
  return z.cwiseMax(lo).cwiseMin(hi);
}

struct Pair {
  Eigen::VectorXd s, y;
  double rho;
};

// Standard two-loop recursion with the latest-pair scaling.
Eigen::VectorXd two_loop(const std::deque<Pair>& mem,
                         const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(mem.size());
  for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
    alpha[i] = mem[i].rho * mem[i].s.dot(q);
    q -= alpha[i] * mem[i].y;
  }
  if (!mem.empty()) {
    const Pair& last = mem.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (size_t i = 0; i < mem.size(); ++i) {
    double beta = mem[i].rho * mem[i].y.dot(q);
    q += (alpha[i] - beta) * mem[i].s;
  }
  return q;
}

}  // namespace

InnerReport minimize_box(const BoxObjective& objective, Eigen::VectorXd& z,
                         const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper, const InnerOptions& opt,
                         const IterateCallback& callback) {
  InnerReport rep;
  z = project(z, lower, upper);
  double f;
  Eigen::VectorXd g;
  rep.evaluations++;
  if (!objective(z, f, &g)) {
    rep.stalled = true;
    return rep;
  }

  std::deque<Pair> memory;
  const double bound_eps = 1e-12;

  for (int it = 0; it < opt.max_iterations; ++it) {
    Eigen::VectorXd pg = z - project(z - g, lower, upper);
    rep.proj_grad = pg.lpNorm<Eigen::Infinity>();
    rep.value = f;
    if (callback) callback(it, z, f, rep.proj_grad);
    if (rep.proj_grad <= opt.grad_tol) {
      rep.converged = true;
      return rep;
    }

    // mask variables pinned at a bound with the gradient pushing outward
    Eigen::VectorXd gm = g;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      bool at_lo = z[i] <= lower[i] + bound_eps && g[i] > 0.0;
      bool at_hi = z[i] >= upper[i] - bound_eps && g[i] < 0.0;
      if (at_lo || at_hi) gm[i] = 0.0;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Eigen::VectorXd dir =
          attempt == 0 && !memory.empty() ? -two_loop(memory, gm) : -gm;
      for (Eigen::Index i = 0; i < z.size(); ++i)
        if (gm[i] == 0.0 && g[i] != 0.0) dir[i] = 0.0;
      if (dir.dot(g) >= 0.0) continue;  // not a descent direction

      double t = 1.0;
      for (int ls = 0; ls <= opt.max_backtracks; ++ls) {
        Eigen::VectorXd zt = project(z + t * dir, lower, upper);
        Eigen::VectorXd dz = zt - z;
        double pred = g.dot(dz);
        if (pred >= -1e-16 * std::max(1.0, std::abs(f))) break;  // path pinned
        double ft;
        rep.evaluations++;
        if (objective(zt, ft, nullptr) && ft <= f + opt.armijo * pred) {
          // re-evaluate with the gradient at the accepted point
          double fa;
          Eigen::VectorXd ga;
          rep.evaluations++;
          if (!objective(zt, fa, &ga)) break;
          Eigen::VectorXd s = zt - z;
          Eigen::VectorXd y = ga - g;
          double sy = s.dot(y);
          if (sy > 1e-12 * s.norm() * y.norm()) {
            memory.push_back({s, y, 1.0 / sy});
            if (static_cast<int>(memory.size()) > opt.memory)
              memory.pop_front();
          }
          z = zt;
          f = fa;
          g = ga;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
    }
    rep.iterations = it + 1;
    if (!accepted) {
      rep.stalled = true;
      Eigen::VectorXd pg2 = z - project(z - g, lower, upper);
      rep.proj_grad = pg2.lpNorm<Eigen::Infinity>();
      rep.value = f;
      return rep;
    }
  }
  Eigen::VectorXd pg = z - project(z - g, lower, upper);
  rep.proj_grad = pg.lpNorm<Eigen::Infinity>();
  rep.value = f;
  return rep;
}

}  // namespace dhn
