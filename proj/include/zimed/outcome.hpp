#pragma once

#include <array>

namespace zimed {

// Y = b0 + b1 m + b2 1(m>0) + b3 x + b4 x 1(m>0) + b5 x m + eps,  eps ~ N(0, delta^2)
struct OutcomeParams {
  std::array<double, 6> beta{};
  double delta = 1.0;
};

// `offset` carries confounder terms already multiplied out.
double outcome_mean(const OutcomeParams& p, double x, double m, double offset = 0.0);
double outcome_logpdf(const OutcomeParams& p, double y, double x, double m, double offset = 0.0);

}  // namespace zimed
