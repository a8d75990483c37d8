#pragma once

#include "zimed/distributions.hpp"

namespace zimed {

// Detection model for zeros: a true value m is recorded as 0 with probability
//   1               if m == 0
//   exp(-eta^2 m)   if 0 < m <= cap
//   0               if m > cap
// eta is kept unsquared so the optimizer can move it freely.
struct FalseZeroMechanism {
  double eta = 1.0;
  double cap = 20.0;  // B

  double rate() const { return eta * eta; }

  double prob_observed_zero(double m) const;
  // log(1 - prob_observed_zero(m)) for m > 0; -inf when detection is certain
  // to fail.
  double log_prob_observed_positive(double m) const;

  double observe(double m, Rng& rng) const;
};

inline constexpr double kDefaultCap = 20.0;

double prob_observed_zero(const FalseZeroMechanism& mech, double m);
double observe(const FalseZeroMechanism& mech, double m, Rng& rng);

}  // namespace zimed
