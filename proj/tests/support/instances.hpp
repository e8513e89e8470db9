#pragma once

#include <functional>
#include <string>

#include "dhn/problem.hpp"

namespace dhn::testing {

// Plant, one street, one consumer: 4 nodes / 6 edges after mirroring.
std::string minimal_document();
Problem make_minimal_problem();

// Two plants feeding a 4x3 consumer grid through 20 streets (40 pipes),
// demands cycling through three building sizes.  Deterministic: street
// lengths come from a fixed seed.
std::string desk_document();
Problem make_desk_problem();

// Nested catalog family for rounding studies: 2 drops entries of 1, 3 of 2.
PipeCatalog desk_catalog(int which);

// Central differences for Jacobian and gradient audits.
Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step);
double fd_scalar(const std::function<double(double)>& f, double x,
                 double step);

}  // namespace dhn::testing
