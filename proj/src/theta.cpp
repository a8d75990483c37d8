#include "zimed/theta.hpp"

#include <cmath>

#include "zimed/error.hpp"

namespace zimed {

std::size_t theta_dimension(MediatorFamily family, std::size_t p) {
  const std::size_t base = family == MediatorFamily::zip ? 12 : 13;
  return base + 3 * p;
}

int dispersion_index(MediatorFamily family) { return family == MediatorFamily::zip ? -1 : 11; }

int eta_index(MediatorFamily family) { return family == MediatorFamily::zip ? 11 : 12; }

std::size_t Theta::dimension() const { return theta_dimension(family, n_confounders()); }

Eigen::VectorXd Theta::pack() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dimension()));
  Eigen::Index k = 0;
  for (double b : outcome.beta) v[k++] = b;
  v[k++] = std::log(outcome.delta);
  v[k++] = link.alpha0;
  v[k++] = link.alpha1;
  v[k++] = link.gamma0;
  v[k++] = link.gamma1;
  if (family == MediatorFamily::zilon) v[k++] = std::log(link.sigma);
  if (family == MediatorFamily::zinb) v[k++] = std::log(link.r);
  v[k++] = eta;
  for (double c : outcome_z) v[k++] = c;
  for (double c : location_z) v[k++] = c;
  for (double c : zero_z) v[k++] = c;
  return v;
}

Theta Theta::unpack(MediatorFamily family, std::size_t p, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != theta_dimension(family, p)) {
    throw DomainError("parameter vector has wrong dimension for " + std::string(to_string(family)));
  }
  Theta t;
  t.family = family;
  Eigen::Index k = 0;
  for (double& b : t.outcome.beta) b = v[k++];
  t.outcome.delta = std::exp(v[k++]);
  t.link.alpha0 = v[k++];
  t.link.alpha1 = v[k++];
  t.link.gamma0 = v[k++];
  t.link.gamma1 = v[k++];
  if (family == MediatorFamily::zilon) t.link.sigma = std::exp(v[k++]);
  if (family == MediatorFamily::zinb) t.link.r = std::exp(v[k++]);
  t.eta = v[k++];
  t.outcome_z.resize(p);
  t.location_z.resize(p);
  t.zero_z.resize(p);
  for (auto& c : t.outcome_z) c = v[k++];
  for (auto& c : t.location_z) c = v[k++];
  for (auto& c : t.zero_z) c = v[k++];
  return t;
}

Eigen::VectorXd Theta::natural() const {
  Eigen::VectorXd v = pack();
  v[kLogDeltaIndex] = outcome.delta;
  if (family == MediatorFamily::zilon) v[11] = link.sigma;
  if (family == MediatorFamily::zinb) v[11] = link.r;
  return v;
}

std::vector<std::string> Theta::names() const {
  std::vector<std::string> n = {"beta0", "beta1", "beta2", "beta3", "beta4", "beta5", "delta",
                                "alpha0", "alpha1", "gamma0", "gamma1"};
  if (family == MediatorFamily::zilon) n.emplace_back("sigma");
  if (family == MediatorFamily::zinb) n.emplace_back("r");
  n.emplace_back("eta");
  for (std::size_t j = 0; j < outcome_z.size(); ++j) n.push_back("beta_z" + std::to_string(j + 1));
  for (std::size_t j = 0; j < location_z.size(); ++j) n.push_back("alpha_z" + std::to_string(j + 1));
  for (std::size_t j = 0; j < zero_z.size(); ++j) n.push_back("gamma_z" + std::to_string(j + 1));
  return n;
}

void Theta::validate() const {
  zimed::validate(family, link);
  if (!(outcome.delta > 0.0 && std::isfinite(outcome.delta))) {
    throw DomainError("outcome error SD delta must be positive");
  }
  if (location_z.size() != outcome_z.size() || zero_z.size() != outcome_z.size()) {
    throw DomainError("confounder coefficient blocks must have equal length");
  }
  if (!std::isfinite(eta)) throw DomainError("eta must be finite");
}

}  // namespace zimed
