#include "zimed/outcome.hpp"

#include <cmath>

#include "zimed/error.hpp"
#include "zimed/numeric.hpp"

namespace zimed {

double outcome_mean(const OutcomeParams& p, double x, double m, double offset) {
  if (m < 0.0) throw DomainError("outcome_mean: mediator must be non-negative");
  const auto& b = p.beta;
  const double ind = m > 0.0 ? 1.0 : 0.0;
  return b[0] + b[1] * m + b[2] * ind + b[3] * x + b[4] * x * ind + b[5] * x * m + offset;
}

double outcome_logpdf(const OutcomeParams& p, double y, double x, double m, double offset) {
  if (!(p.delta > 0.0)) throw DomainError("outcome error SD must be positive");
  const double z = (y - outcome_mean(p, x, m, offset)) / p.delta;
  return -num::kLogSqrt2Pi - std::log(p.delta) - 0.5 * z * z;
}

}  // namespace zimed
