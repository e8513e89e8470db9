#pragma once

#include <Eigen/Dense>

#include "dhn/catalog.hpp"

namespace dhn {

// Interpolation between catalog diameters is steered by a per-discipline
// penalized diameter: the interpolated value is biased toward the
// neighbouring catalog point that makes the discipline look worse, so
// intermediate diameters are unattractive and the optimum settles on the
// grid.  ToLower biases down (hydraulics: more friction), ToUpper biases up
// (heat loss and cost: bigger, lossier, dearer pipe).
enum class PenalBias { ToLower, ToUpper };

// Monotone C1 ramp approximating max(z, 0): exactly 0 below 0, exactly z
// above w, z*smoothstep(z/w) in between.  Max deviation 0.2563*w.
double smooth_ramp(double z, double w);
double smooth_ramp_d(double z, double w);

// C1 approximation of min(max(z, 0), 1) built from the ramp through the
// rectifier identity min(a, b) = b - max(b - a, 0):
//   clip(z) = 1 - ramp(1 - ramp(z)).
// Monotone (composition of monotone maps), endpoints exact in double,
// max error <= beta with ramp width 2*beta.
double smooth_clip(double z, double beta);
double smooth_clip_d(double z, double beta);

// Penalized diameter: staircase interpolation over the grid
// {void, D_1, ..., D_m} with a steepened, clipped transition per interval.
// steepness 0 is the exact identity map.  Nondecreasing in d for any
// steepness; fixes every grid point.
double penalize(double d, double steepness, PenalBias bias,
                const PipeCatalog& catalog, double beta);
double penalize_gradient(double d, double steepness, PenalBias bias,
                         const PipeCatalog& catalog, double beta);

// The three discipline mappings of one diameter vector plus derivatives.
struct PenalizedDiameters {
  Eigen::VectorXd hydraulic, thermal, cost;
  Eigen::VectorXd hydraulic_d, thermal_d, cost_d;
};
PenalizedDiameters apply_directions(const Eigen::VectorXd& d, double steepness,
                                    const PipeCatalog& catalog, double beta);

}  // namespace dhn
