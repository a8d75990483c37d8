#include "zimed/effects.hpp"

#include <cmath>

#include "zimed/error.hpp"
#include "zimed/finite_diff.hpp"
#include "zimed/numeric.hpp"

namespace zimed {

std::string_view to_string(Effect e) {
  switch (e) {
    case Effect::nie1: return "NIE1";
    case Effect::nie2: return "NIE2";
    case Effect::nie: return "NIE";
    case Effect::nde: return "NDE";
    case Effect::cde: return "CDE";
  }
  return "?";
}

double EffectValues::operator[](Effect e) const {
  switch (e) {
    case Effect::nie1: return nie1;
    case Effect::nie2: return nie2;
    case Effect::nie: return nie;
    case Effect::nde: return nde;
    case Effect::cde: return cde;
  }
  return 0.0;
}

Eigen::VectorXd EffectValues::as_vector() const {
  Eigen::VectorXd v(5);
  v << nie1, nie2, nie, nde, cde;
  return v;
}

namespace {

struct Conditional {
  double nie1, nie2, nde;
};

Conditional conditional_effects(const Theta& th, double x1, double x2, const std::vector<double>* z) {
  double loc_off = 0.0;
  double zero_off = 0.0;
  if (z) {
    for (std::size_t j = 0; j < z->size(); ++j) {
      loc_off += th.location_z[j] * (*z)[j];
      zero_off += th.zero_z[j] * (*z)[j];
    }
  }
  const LinkParams& lk = th.link;
  const MediatorLaw law1(th.family, lk.alpha0 + lk.alpha1 * x1 + loc_off,
                         lk.gamma0 + lk.gamma1 * x1 + zero_off, lk.sigma, lk.r);
  const MediatorLaw law2(th.family, lk.alpha0 + lk.alpha1 * x2 + loc_off,
                         lk.gamma0 + lk.gamma1 * x2 + zero_off, lk.sigma, lk.r);
  const auto& b = th.outcome.beta;
  const double mean1 = law1.mean();
  const double mean2 = law2.mean();
  const double d1 = law1.zero_prob();
  const double d2 = law2.zero_prob();
  Conditional c{};
  c.nie1 = (b[1] + b[5] * x2) * (mean2 - mean1);
  c.nie2 = (b[2] + b[4] * x2) * (d1 - d2);
  c.nde = (x2 - x1) * (b[3] + (1.0 - d1) * b[4] + b[5] * mean1);
  return c;
}

}  // namespace

EffectValues effects_point(const Theta& th, double x1, double x2, double cde_m,
                           const std::vector<std::vector<double>>& rows) {
  if (cde_m < 0.0) throw DomainError("CDE mediator value must be non-negative");
  EffectValues v;
  if (th.n_confounders() == 0 || rows.empty()) {
    const Conditional c = conditional_effects(th, x1, x2, nullptr);
    v.nie1 = c.nie1;
    v.nie2 = c.nie2;
    v.nde = c.nde;
  } else {
    std::vector<double> a(rows.size()), b(rows.size()), d(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != th.n_confounders()) throw DomainError("confounder row has wrong width");
      const Conditional c = conditional_effects(th, x1, x2, &rows[i]);
      a[i] = c.nie1;
      b[i] = c.nie2;
      d[i] = c.nde;
    }
    const double n = static_cast<double>(rows.size());
    v.nie1 = num::pairwise_sum(a) / n;
    v.nie2 = num::pairwise_sum(b) / n;
    v.nde = num::pairwise_sum(d) / n;
  }
  v.nie = v.nie1 + v.nie2;
  const auto& beta = th.outcome.beta;
  v.cde = (x2 - x1) * (beta[3] + beta[4] * (cde_m > 0.0 ? 1.0 : 0.0) + beta[5] * cde_m);
  return v;
}

EffectEstimates effects_with_covariance(const Theta& theta, const Eigen::MatrixXd& cov,
                                        const EffectRequest& req, double default_cde_m,
                                        const std::vector<std::vector<double>>& rows) {
  if (!(req.ci_level > 0.0 && req.ci_level < 1.0)) throw DomainError("ci_level must lie in (0, 1)");
  const auto k = static_cast<Eigen::Index>(theta.dimension());
  if (cov.rows() != k || cov.cols() != k) throw DomainError("covariance has wrong dimension");

  EffectEstimates out;
  out.x1 = req.x1;
  out.x2 = req.x2;
  out.cde_m = req.cde_m.value_or(default_cde_m);
  out.ci_level = req.ci_level;
  if (req.x1 == req.x2) out.warnings.emplace_back("x1 equals x2; every effect is zero");

  const MediatorFamily fam = theta.family;
  const std::size_t p = theta.n_confounders();
  auto effect_map = [&](const Eigen::VectorXd& v) {
    return effects_point(Theta::unpack(fam, p, v), req.x1, req.x2, out.cde_m, rows).as_vector();
  };
  const Eigen::VectorXd x = theta.pack();
  const Eigen::VectorXd point = effect_map(x);
  const Eigen::MatrixXd J = fd::central_jacobian(effect_map, x, kEffectGradientStep);
  const double zq = num::normal_quantile(0.5 + 0.5 * req.ci_level);

  for (std::size_t e = 0; e < kAllEffects.size(); ++e) {
    const auto idx = static_cast<Eigen::Index>(e);
    EffectEstimate& est = out.values[e];
    est.estimate = point[idx];
    const Eigen::VectorXd g = J.row(idx).transpose();
    est.se = std::sqrt(std::max(g.dot(cov * g), 0.0));
    est.lower = est.estimate - zq * est.se;
    est.upper = est.estimate + zq * est.se;
    if (est.se > 0.0) {
      est.p_value = 2.0 * num::normal_cdf(-std::abs(est.estimate) / est.se);
    } else {
      est.p_value = est.estimate == 0.0 ? 1.0 : 0.0;
    }
  }
  return out;
}

EffectEstimates effects_with_inference(const FitResult& fit, const EffectRequest& req) {
  EffectEstimates out = effects_with_covariance(fit.theta_hat, fit.covariance, req,
                                                fit.median_positive_m, fit.confounder_rows);
  if (fit.covariance_unreliable) {
    out.warnings.emplace_back("covariance flagged unreliable; standard errors may be invalid");
  }
  return out;
}

}  // namespace zimed
