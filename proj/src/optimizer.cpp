#include "zimed/optimizer.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "zimed/finite_diff.hpp"

namespace zimed::opt {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 50;

}  // namespace

BfgsResult maximize(const std::function<double(const Eigen::VectorXd&)>& f_raw,
                    const Eigen::VectorXd& x0, const BfgsOptions& options, BfgsMemory* memory) {
  auto fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    if (grad) *grad = fd::central_gradient(f_raw, x, options.fd_step);
    return f_raw(x);
  };
  return maximize(ValueGradient(fg), x0, options, memory);
}

BfgsResult maximize(const ValueGradient& fg, const Eigen::VectorXd& x0,
                    const BfgsOptions& options, BfgsMemory* memory) {
  BfgsResult res;
  int evals = 0;
  auto f = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = fg(x, nullptr);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };
  auto gradient = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd out;
    fg(x, &out);
    return out;
  };
  const Eigen::Index k = x0.size();
  const bool boxed = options.lower.size() == k && options.upper.size() == k;
  auto project = [&](Eigen::VectorXd v) {
    if (boxed) v = v.cwiseMax(options.lower).cwiseMin(options.upper);
    return v;
  };
  // Gradient with the components pushing out of the box removed.
  auto free_gradient = [&](const Eigen::VectorXd& x, Eigen::VectorXd g) {
    if (!boxed) return g;
    for (Eigen::Index i = 0; i < k; ++i) {
      if ((x[i] >= options.upper[i] && g[i] > 0.0) || (x[i] <= options.lower[i] && g[i] < 0.0)) {
        g[i] = 0.0;
      }
    }
    return g;
  };

  Eigen::VectorXd x = project(x0);
  double fx = f(x);
  Eigen::VectorXd g = gradient(x);

  // H approximates the inverse of the negative Hessian.
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(k, k);
  if (memory && memory->inverse_curvature && memory->inverse_curvature->rows() == k) {
    H = *memory->inverse_curvature;
  }

  bool moved = false;
  for (int it = 0; it < options.max_iter; ++it) {
    res.iterations = it;
    if (!std::isfinite(fx)) break;
    const Eigen::VectorXd gf = free_gradient(x, g);
    if (gf.cwiseAbs().maxCoeff() <= options.grad_tol * (1.0 + std::abs(fx))) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir = H * gf;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (gf[i] == 0.0 && g[i] != 0.0) dir[i] = 0.0;
    }
    if (!(gf.dot(dir) > 0.0)) {
      H.setIdentity();
      dir = gf;
    }

    double step = 1.0;
    Eigen::VectorXd x_new;
    double f_new = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = project(x + step * dir);
      const double slope = g.dot(x_new - x);
      if (!(slope > 0.0)) break;
      f_new = f(x_new);
      if (f_new >= fx + kArmijo * slope) {
        accepted = true;
        break;
      }
      step *= bt < 2 ? 0.5 : 0.2;
    }
    if (!accepted || !(f_new >= fx)) {
      // The metric may be stale; retry once along the gradient before giving up.
      if (!H.isIdentity()) {
        H.setIdentity();
        continue;
      }
      break;
    }

    const double gain = f_new - fx;
    const Eigen::VectorXd g_new = gradient(x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g - g_new;  // gradient change of -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      if (!moved && !(memory && memory->inverse_curvature)) {
        H *= sy / y.squaredNorm();
      }
      const Eigen::VectorXd Hy = H * y;
      H += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose()) -
           rho * (Hy * s.transpose() + s * Hy.transpose());
    }
    x = x_new;
    fx = f_new;
    g = g_new;
    moved = true;
    res.iterations = it + 1;
    if (gain <= options.f_tol * (1.0 + std::abs(fx))) {
      res.converged = true;
      break;
    }
  }

  res.stalled = !moved;
  res.x = x;
  res.f = fx;
  res.grad = g;
  res.evaluations = evals;
  if (memory) memory->inverse_curvature = H;
  return res;
}

}  // namespace zimed::opt
