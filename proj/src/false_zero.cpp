#include "zimed/false_zero.hpp"

#include <cmath>

#include "zimed/error.hpp"
#include "zimed/numeric.hpp"

namespace zimed {

double FalseZeroMechanism::prob_observed_zero(double m) const {
  if (!(cap > 0.0)) throw DomainError("false-zero cap B must be positive");
  if (m < 0.0 || std::isnan(m)) throw DomainError("mediator value must be non-negative");
  if (m == 0.0) return 1.0;
  if (m > cap) return 0.0;
  return std::exp(-rate() * m);
}

double FalseZeroMechanism::log_prob_observed_positive(double m) const {
  if (m > cap) return 0.0;
  return num::log1m_exp(-rate() * m);
}

double FalseZeroMechanism::observe(double m, Rng& rng) const {
  const double p = prob_observed_zero(m);
  if (p == 0.0) return m;
  if (p == 1.0) return 0.0;
  std::bernoulli_distribution hide(p);
  return hide(rng) ? 0.0 : m;
}

double prob_observed_zero(const FalseZeroMechanism& mech, double m) {
  return mech.prob_observed_zero(m);
}

double observe(const FalseZeroMechanism& mech, double m, Rng& rng) { return mech.observe(m, rng); }

}  // namespace zimed
