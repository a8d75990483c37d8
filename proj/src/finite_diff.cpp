#include "zimed/finite_diff.hpp"

#include <cmath>

namespace zimed::fd {

Eigen::VectorXd steps(const Eigen::VectorXd& x, double rel_step) {
  return (1.0 + x.array().abs()) * rel_step;
}

Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  const Eigen::VectorXd h = steps(x, rel_step);
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h[j];
    const double fp = f(xp);
    xp[j] = x[j] - h[j];
    const double fm = f(xp);
    xp[j] = x[j];
    g[j] = (fp - fm) / (2.0 * h[j]);
  }
  return g;
}

Eigen::MatrixXd central_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index k = x.size();
  const Eigen::VectorXd h = steps(x, rel_step);
  const double f0 = f(x);
  Eigen::MatrixXd H(k, k);
  Eigen::VectorXd xp = x;
  for (Eigen::Index j = 0; j < k; ++j) {
    xp[j] = x[j] + h[j];
    const double fp = f(xp);
    xp[j] = x[j] - h[j];
    const double fm = f(xp);
    xp[j] = x[j];
    H(j, j) = (fp - 2.0 * f0 + fm) / (h[j] * h[j]);
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index l = j + 1; l < k; ++l) {
      auto eval = [&](double sj, double sl) {
        xp[j] = x[j] + sj * h[j];
        xp[l] = x[l] + sl * h[l];
        const double v = f(xp);
        xp[j] = x[j];
        xp[l] = x[l];
        return v;
      };
      const double v = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * h[j] * h[l]);
      H(j, l) = v;
      H(l, j) = v;
    }
  }
  return H;
}

Eigen::MatrixXd central_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double rel_step) {
  const Eigen::VectorXd h = steps(x, rel_step);
  Eigen::VectorXd xp = x;
  Eigen::MatrixXd J;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h[j];
    const Eigen::VectorXd fp = f(xp);
    xp[j] = x[j] - h[j];
    const Eigen::VectorXd fm = f(xp);
    xp[j] = x[j];
    if (J.size() == 0) J.resize(fp.size(), x.size());
    J.col(j) = (fp - fm) / (2.0 * h[j]);
  }
  return J;
}

double hessian_richardson_discrepancy(const Objective& f, const Eigen::VectorXd& x,
                                      double rel_step) {
  const Eigen::MatrixXd coarse = central_hessian(f, x, rel_step);
  const Eigen::MatrixXd fine = central_hessian(f, x, 0.5 * rel_step);
  const double scale = fine.cwiseAbs().maxCoeff();
  if (scale == 0.0) return (coarse - fine).cwiseAbs().maxCoeff();
  return (coarse - fine).cwiseAbs().maxCoeff() / scale;
}

}  // namespace zimed::fd
