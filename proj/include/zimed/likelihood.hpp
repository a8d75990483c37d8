#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "zimed/data.hpp"
#include "zimed/false_zero.hpp"
#include "zimed/theta.hpp"

namespace zimed {

// How per-record kernels are evaluated. Both policies compute every record
// with the same code and reduce with the same pairwise sum, so results are
// bit-identical; `serial` is the reference used by tests and the benchmark.
enum class Exec { serial, parallel };

struct Responsibilities {
  double tau0 = 0.0;  // P(true zero | data)
  double tau1 = 0.0;  // P(false zero | data)
};

// Relative tolerance the false-zero integral must reach; the integrator aims
// two digits tighter so finite differences of the likelihood stay smooth.
inline constexpr double kQuadRelTol = 1e-8;
inline constexpr double kQuadTargetRelTol = 1e-10;
inline constexpr double kQuadAbsFloor = 1e-300;

// Every per-record likelihood ingredient at one parameter value.
struct RecordTerms {
  bool positive = false;
  double log_delta = 0.0;     // log P(M = 0)
  double log_1m_delta = 0.0;  // log P(M > 0)
  double l_pos = 0.0;         // group 1: log f(y, m*, R=1 | x, C=1)
  double l_true_zero = 0.0;   // group 2: log f(y, m*=0 | x, C=0)
  double l_false_zero = 0.0;  // group 2: log f(y, m*=0 | x, C=1)

  // Marginal log-likelihood contribution of the record.
  double observed() const;
  // Contribution to Q given the true-zero responsibility tau0.
  double expected(double tau0) const;
  double tau0() const;
};

// Evaluates the record terms. Non-throwing in the -inf case (degenerate
// detection), throws NumericalError if the quadrature fails.
RecordTerms record_terms(const Theta& theta, const Record& rec, double cap);

// log of  int_0^cap  N(y; a + b m, delta) exp(-eta2 m) LogNormal(m; mu, sigma) dm,
// computed in u = log m.
double zilon_false_zero_term(double y, double a, double b, double delta, double mu, double sigma,
                             double eta2, double cap);

// Single-record operations. They check the record group and throw
// DomainError on misuse.
double loglik_pos(const Theta& theta, const Record& rec, double cap = kDefaultCap);
double loglik_true_zero(const Theta& theta, const Record& rec);
double loglik_false_zero(const Theta& theta, const Record& rec, double cap = kDefaultCap);
Responsibilities responsibilities(const Theta& theta, const Record& rec, double cap = kDefaultCap);

// E step: tau0 for every record (0 for records with m* > 0).
std::vector<double> e_step(const Theta& theta, const Dataset& data, double cap,
                           Exec exec = Exec::parallel);

// Q(theta | theta0) with the responsibilities already evaluated at theta0.
double q_given_tau(const Theta& theta, const Dataset& data, std::span<const double> tau0,
                   double cap, Exec exec = Exec::parallel);
double q_function(const Theta& theta, const Theta& theta0, const Dataset& data,
                  double cap = kDefaultCap, Exec exec = Exec::parallel);

double observed_loglik(const Theta& theta, const Dataset& data, double cap = kDefaultCap,
                       Exec exec = Exec::parallel);

// Value plus analytic gradient in packed coordinates. The observed-data
// score is the gradient of Q at responsibilities taken from theta itself.
double q_given_tau_grad(const Theta& theta, const Dataset& data, std::span<const double> tau0,
                        double cap, Exec exec, Eigen::VectorXd& grad);
double observed_loglik_grad(const Theta& theta, const Dataset& data, double cap, Exec exec,
                            Eigen::VectorXd& grad);

// Per-record marginal contributions (before reduction).
std::vector<double> observed_loglik_terms(const Theta& theta, const Dataset& data, double cap,
                                          Exec exec = Exec::parallel);

}  // namespace zimed
