#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "dhn/problem.hpp"

namespace dhn {

// Inequality rows h(x) <= 0 of the reduced formulation: two demand band
// rows per consumer (delivered heat within the tolerance band around the
// contracted demand, normalized by the demand) and one valve realisability
// row per consumer edge (required drop zeta q not above the available
// pressure difference, normalized by the pressure scale).
struct ConstraintRow {
  enum class Kind { DemandUpper, DemandLower, Valve };
  Kind kind;
  int edge;  // graph edge index
};

class ConstraintSet {
 public:
  explicit ConstraintSet(const Problem& problem);

  int size() const { return static_cast<int>(rows_.size()); }
  const std::vector<ConstraintRow>& rows() const { return rows_; }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
  Eigen::SparseMatrix<double> state_jacobian(const Eigen::VectorXd& x) const;

  // Signed relative demand mismatch (Q - Qd)/Qd per consumer
  // (graph.heating order).
  Eigen::VectorXd demand_mismatch(const Eigen::VectorXd& x) const;

 private:
  const Problem* problem_;
  StateLayout layout_;
  std::vector<ConstraintRow> rows_;
};

}  // namespace dhn
