#pragma once

#include <functional>

#include <Eigen/Core>

namespace zimed::fd {

using Objective = std::function<double(const Eigen::VectorXd&)>;

// Step for coordinate j: rel_step * (1 + |x_j|).
Eigen::VectorXd steps(const Eigen::VectorXd& x, double rel_step);

Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step);

// Central second differences; symmetric by construction.
Eigen::MatrixXd central_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step);

// Jacobian of a vector-valued map by central differences (rows = outputs).
Eigen::MatrixXd central_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double rel_step);

// Richardson consistency of a central-difference Hessian: the estimate at
// step h and at h/2 must agree to within `tol` relative to the largest entry.
// The returned value is max|H(h) - H(h/2)| / max|H(h/2)|.
double hessian_richardson_discrepancy(const Objective& f, const Eigen::VectorXd& x,
                                      double rel_step);

}  // namespace zimed::fd
