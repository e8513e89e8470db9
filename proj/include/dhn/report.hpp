#pragma once

#include <string>
#include <vector>

#include "dhn/optimizer.hpp"

namespace dhn {

// All report builders return complete file contents.  Every file starts
// with "# config=<hash> schema=1" so any output can be traced to the exact
// configuration that produced it; nothing varies between runs of the same
// configuration, so reruns are byte-identical.

std::string history_csv(const Problem& p,
                        const std::vector<IterateRecord>& history);
std::string design_evolution_csv(const Problem& p,
                                 const std::vector<IterateRecord>& history);
std::string edges_csv(const Problem& p, const DesignPoint& d,
                      const Eigen::VectorXd& x);
std::string consumers_csv(const Problem& p, const DesignPoint& d,
                          const Eigen::VectorXd& x);
std::string producers_csv(const Problem& p, const DesignPoint& d,
                          const Eigen::VectorXd& x);
std::string breakdown_csv(const Problem& p, const CostBreakdown& costs);
std::string comparison_csv(const Problem& p,
                           const std::vector<CatalogOutcome>& outcomes);
std::string penalization_curves_csv(const Problem& p, int samples);
std::string summary_text(const Problem& p, const OptimizeResult& result);

// Writes the standard bundle of an optimization run into `dir` (created if
// needed): history.csv, design_evolution.csv, edges.csv, consumers.csv,
// producers.csv, breakdown.csv, summary.txt, design.json, network.json.
void write_run_reports(const std::string& dir, const Problem& p,
                       const OptimizeResult& result);

// Finite-difference audit of the adjoint gradient at random interior
// designs (diameters uniform inside a random catalog interval, openings
// and plant rises in their working ranges).  rel_error compares the
// adjoint and central-difference gradients in the infinity norm.
struct GradientCheckSample {
  int sample = 0;
  double steepness = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
  double fd_norm = 0.0;
  int worst_index = -1;
};
std::vector<GradientCheckSample> check_gradients(
    const Problem& problem, int samples, unsigned long long seed,
    const std::vector<double>& steepnesses);
std::string gradient_check_csv(const Problem& p,
                               const std::vector<GradientCheckSample>& rows);

}  // namespace dhn
