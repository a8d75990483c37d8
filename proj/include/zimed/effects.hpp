#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "zimed/estimator.hpp"
#include "zimed/theta.hpp"

namespace zimed {

struct EffectRequest {
  double x1 = 0.0;
  double x2 = 1.0;
  std::optional<double> cde_m;  // default: median of the positive m*
  double ci_level = 0.95;
};

enum class Effect { nie1, nie2, nie, nde, cde };
inline constexpr std::array<Effect, 5> kAllEffects = {Effect::nie1, Effect::nie2, Effect::nie,
                                                      Effect::nde, Effect::cde};
std::string_view to_string(Effect e);

// Raw effect values when X moves from x1 to x2.
struct EffectValues {
  double nie1 = 0.0;
  double nie2 = 0.0;
  double nie = 0.0;  // always nie1 + nie2
  double nde = 0.0;
  double cde = 0.0;

  double operator[](Effect e) const;
  Eigen::VectorXd as_vector() const;  // kAllEffects order
};

struct EffectEstimate {
  double estimate = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double p_value = 1.0;
};

struct EffectEstimates {
  double x1 = 0.0;
  double x2 = 0.0;
  double cde_m = 0.0;
  double ci_level = 0.95;
  std::array<EffectEstimate, 5> values{};  // kAllEffects order
  std::vector<std::string> warnings;

  const EffectEstimate& operator[](Effect e) const { return values[static_cast<std::size_t>(e)]; }
};

// Closed-form effects. With confounders the conditional effects are averaged
// over `confounder_rows` (the sample's z values); without confounders the
// rows are ignored.
EffectValues effects_point(const Theta& theta, double x1, double x2, double cde_m,
                           const std::vector<std::vector<double>>& confounder_rows = {});

// Delta-method inference using the fit's covariance (packed coordinates) and
// central-difference gradients of the effect formulas.
EffectEstimates effects_with_inference(const FitResult& fit, const EffectRequest& request);

// Same, from an explicit parameter vector and covariance.
EffectEstimates effects_with_covariance(const Theta& theta, const Eigen::MatrixXd& covariance,
                                        const EffectRequest& request, double default_cde_m,
                                        const std::vector<std::vector<double>>& confounder_rows = {});

inline constexpr double kEffectGradientStep = 1e-6;

}  // namespace zimed
