#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace zimed::num {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 / (1 + exp(-t))), accurate for large |t|.
inline double log_sigmoid(double t) {
  return t >= 0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
}

inline double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 - exp(a)) for a <= 0.
inline double log1m_exp(double a) {
  if (a > -0.6931471805599453) return std::log(-std::expm1(a));
  return std::log1p(-std::exp(a));
}

inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

inline double log_sum_exp(std::span<const double> v) {
  double hi = kNegInf;
  for (double x : v) hi = x > hi ? x : hi;
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

// Pairwise summation. The split points depend only on the length, so the
// result is reproducible for a given input order.
double pairwise_sum(std::span<const double> v);

double normal_cdf(double z);
double normal_quantile(double p);

}  // namespace zimed::num
