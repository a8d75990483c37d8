#pragma once

#include <functional>
#include <optional>

#include <Eigen/Core>

namespace zimed::opt {

struct BfgsOptions {
  int max_iter = 200;
  // Converged when max|grad| <= grad_tol * (1 + |f|).
  double grad_tol = 1e-8;
  // ... or when an accepted step improves f by less than f_tol * (1 + |f|).
  double f_tol = 1e-14;
  double fd_step = 1e-5;  // relative central-difference step for the gradient
  // Optional box. Steps are projected onto it and coordinates held at a bound
  // by an outward gradient are frozen for the iteration.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  // No ascent step could be found from the starting point.
  bool stalled = false;
};

// Inverse-curvature approximation carried between calls so that a sequence of
// closely related problems (successive M steps) starts from a good metric.
struct BfgsMemory {
  std::optional<Eigen::MatrixXd> inverse_curvature;
};

// Maximizes f with BFGS and numerical gradients. Non-finite values of f are
// treated as -inf (the line search backs off). f never decreases along the
// returned path, so f(result.x) >= f(x0).
BfgsResult maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                    const Eigen::VectorXd& x0, const BfgsOptions& options,
                    BfgsMemory* memory = nullptr);

// Returns f(x); fills *grad with the gradient when grad is non-null.
using ValueGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

// Same, with a caller-supplied gradient.
BfgsResult maximize(const ValueGradient& fg, const Eigen::VectorXd& x0,
                    const BfgsOptions& options, BfgsMemory* memory = nullptr);

}  // namespace zimed::opt
