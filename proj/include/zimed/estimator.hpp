#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "zimed/data.hpp"
#include "zimed/false_zero.hpp"
#include "zimed/likelihood.hpp"
#include "zimed/optimizer.hpp"
#include "zimed/theta.hpp"

namespace zimed {

struct FitConfig {
  int max_em_iters = 500;
  double em_tol = 1e-6;     // on the change of the observed log-likelihood
  double mstep_tol = 1e-8;  // gradient tolerance, relative to 1 + |Q|
  int mstep_max_iters = 100;
  double cap = kDefaultCap;
  std::optional<Theta> init;  // empty: heuristic initialization
  double eta_init = 1.0;      // eta of the heuristic start
  unsigned long long seed = 0;
  Exec exec = Exec::parallel;
  bool compute_covariance = true;
};

struct FitResult {
  Theta theta_hat;
  std::vector<double> loglik_trace;  // observed log-likelihood, initial value first
  double loglik = 0.0;
  // Covariance of the packed (working) coordinates; see Theta.
  Eigen::MatrixXd covariance;
  // Natural-scale standard errors, in Theta::names() order.
  Eigen::VectorXd std_errors;
  bool converged = false;
  int n_iters = 0;
  double aic = 0.0;
  int n_params = 0;
  double cap = kDefaultCap;

  bool covariance_unreliable = false;  // pseudo-inverse or boundary estimate
  bool boundary = false;               // zero-probability link at 0 or 1
  int stalled_msteps = 0;
  std::vector<std::string> warnings;

  // Data summaries needed to evaluate effects later.
  double median_positive_m = 0.0;
  std::vector<std::vector<double>> confounder_rows;
  std::size_t n_obs = 0;
  std::size_t n_zero = 0;
};

struct MStepResult {
  Eigen::VectorXd x;
  double q = 0.0;
  double q_start = 0.0;
  bool stalled = false;
  bool converged = false;
  int iterations = 0;
};

// One M step: maximize q over packed coordinates, starting at x0. If no
// ascent is possible the start point is returned with `stalled` set.
MStepResult m_step(const std::function<double(const Eigen::VectorXd&)>& q,
                   const Eigen::VectorXd& x0, double mstep_tol, int max_iters,
                   opt::BfgsMemory* memory = nullptr);
// Optional box bounds on the packed coordinates (empty vectors: none).
MStepResult m_step(const opt::ValueGradient& q, const Eigen::VectorXd& x0, double mstep_tol,
                   int max_iters, opt::BfgsMemory* memory = nullptr,
                   const Eigen::VectorXd& lower = {}, const Eigen::VectorXd& upper = {});

// Cheap consistent starting values: OLS for the outcome, a logistic fit of
// 1(m* = 0) for the zero link, moments of the positive m* for the rest.
Theta heuristic_init(const Dataset& data, MediatorFamily family);

// Throws EstimationError naming the problem when `data` cannot identify the
// model for `family`.
void check_identifiable(const Dataset& data, MediatorFamily family);

FitResult fit(const Dataset& data, MediatorFamily family, const FitConfig& config = {});

// Negative Hessian of the observed log-likelihood in packed coordinates:
// central differences of the analytic score, step 1e-4 (1 + |theta_j|),
// symmetrized.
Eigen::MatrixXd observed_information(const Dataset& data, const Theta& theta_hat,
                                     double cap = kDefaultCap, Exec exec = Exec::parallel);

struct CovarianceResult {
  Eigen::MatrixXd covariance;
  bool pseudo_inverse = false;
};

// Inverts an information matrix; falls back to the eigenvalue-clamped
// pseudo-inverse when it is singular or indefinite.
CovarianceResult invert_information(const Eigen::MatrixXd& info);

inline constexpr double kInformationStep = 1e-4;
inline constexpr double kBoundaryEps = 1e-6;
// Box on |log delta|, |log sigma| and |log r| during the M step; ZINB fitted
// to Poisson data otherwise drifts to r = inf.
inline constexpr double kMaxLogScale = 25.0;
// A fit ending with eta^2 above this (with zeros present) is restarted once
// from a data-driven eta; the better of the two runs is kept.
inline constexpr double kDegenerateRate = 10.0;

}  // namespace zimed
