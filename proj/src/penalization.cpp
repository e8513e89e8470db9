#include "dhn/penalization.hpp"

#include <cmath>

namespace dhn {

double smooth_ramp(double z, double w) {
  if (z <= 0.0) return 0.0;
  if (z >= w) return z;
  double t = z / w;
  return z * (t * t * (3.0 - 2.0 * t));
}

double smooth_ramp_d(double z, double w) {
  if (z <= 0.0) return 0.0;
  if (z >= w) return 1.0;
  double t = z / w;
  // d/dz [z s(t)] = s + t s' = 9t^2 - 8t^3
  return t * t * (9.0 - 8.0 * t);
}

double smooth_clip(double z, double beta) {
  double w = 2.0 * beta;
  return 1.0 - smooth_ramp(1.0 - smooth_ramp(z, w), w);
}

double smooth_clip_d(double z, double beta) {
  double w = 2.0 * beta;
  double inner = smooth_ramp(z, w);
  return smooth_ramp_d(1.0 - inner, w) * smooth_ramp_d(z, w);
}

namespace {

// Steepened normalized transition on one interval, anchored at the interval
// ends for any steepness: value a + tanh(xi (x - a)) / tanh(xi) maps the
// anchor near x = a flat and the opposite anchor steep.
struct Transition {
  double value;
  double slope;  // d/dx
};

Transition transition(double x, double xi, double a) {
  if (xi == 0.0) return {x, 1.0};
  double th = std::tanh(xi);
  return {a + std::tanh(xi * (x - a)) / th,
          xi / (th * std::cosh(xi * (x - a)) * std::cosh(xi * (x - a)))};
}

}  // namespace

double penalize(double d, double steepness, PenalBias bias,
                const PipeCatalog& catalog, double beta) {
  if (steepness == 0.0) return d;  // exact identity, removal costs nothing
  double a = bias == PenalBias::ToLower ? 1.0 : 0.0;
  double out = catalog.grid(0);
  for (int k = 0; k < catalog.intervals(); ++k) {
    double lo = catalog.grid(k);
    double hi = catalog.grid(k + 1);
    double x = (d - lo) / (hi - lo);
    out += (hi - lo) * smooth_clip(transition(x, steepness, a).value, beta);
  }
  return out;
}

double penalize_gradient(double d, double steepness, PenalBias bias,
                         const PipeCatalog& catalog, double beta) {
  if (steepness == 0.0) return 1.0;
  double a = bias == PenalBias::ToLower ? 1.0 : 0.0;
  double out = 0.0;
  for (int k = 0; k < catalog.intervals(); ++k) {
    double lo = catalog.grid(k);
    double hi = catalog.grid(k + 1);
    double x = (d - lo) / (hi - lo);
    Transition t = transition(x, steepness, a);
    out += smooth_clip_d(t.value, beta) * t.slope;
  }
  return out;
}

PenalizedDiameters apply_directions(const Eigen::VectorXd& d, double steepness,
                                    const PipeCatalog& catalog, double beta) {
  PenalizedDiameters out;
  auto n = d.size();
  out.hydraulic.resize(n);
  out.thermal.resize(n);
  out.cost.resize(n);
  out.hydraulic_d.resize(n);
  out.thermal_d.resize(n);
  out.cost_d.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.hydraulic[i] = penalize(d[i], steepness, PenalBias::ToLower, catalog, beta);
    out.hydraulic_d[i] =
        penalize_gradient(d[i], steepness, PenalBias::ToLower, catalog, beta);
    out.thermal[i] = penalize(d[i], steepness, PenalBias::ToUpper, catalog, beta);
    out.thermal_d[i] =
        penalize_gradient(d[i], steepness, PenalBias::ToUpper, catalog, beta);
    out.cost[i] = out.thermal[i];
    out.cost_d[i] = out.thermal_d[i];
  }
  return out;
}

}  // namespace dhn
