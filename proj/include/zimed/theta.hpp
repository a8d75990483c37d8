#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "zimed/distributions.hpp"
#include "zimed/outcome.hpp"

namespace zimed {

// Full parameter vector of the mediation model.
//
// Packed ("working") coordinates, used by the optimizer, the information
// matrix and the delta method:
//   beta0..beta5, log(delta), alpha0, alpha1, gamma0, gamma1,
//   log(sigma) [ZILoN] | log(r) [ZINB] | nothing [ZIP], eta,
//   outcome_z[p], location_z[p], zero_z[p]
struct Theta {
  MediatorFamily family = MediatorFamily::zilon;
  OutcomeParams outcome;
  LinkParams link;
  double eta = 1.0;
  std::vector<double> outcome_z;
  std::vector<double> location_z;
  std::vector<double> zero_z;

  std::size_t n_confounders() const { return outcome_z.size(); }
  std::size_t dimension() const;

  Eigen::VectorXd pack() const;
  static Theta unpack(MediatorFamily family, std::size_t n_confounders, const Eigen::VectorXd& v);

  // Natural-scale value of each packed coordinate (delta instead of log delta ...).
  Eigen::VectorXd natural() const;
  std::vector<std::string> names() const;

  void validate() const;
};

std::size_t theta_dimension(MediatorFamily family, std::size_t n_confounders);

// Index of the dispersion coordinate (log sigma / log r), or -1 for ZIP.
int dispersion_index(MediatorFamily family);
inline constexpr int kLogDeltaIndex = 6;
int eta_index(MediatorFamily family);

}  // namespace zimed
