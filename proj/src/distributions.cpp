#include "zimed/distributions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "zimed/error.hpp"
#include "zimed/numeric.hpp"

namespace zimed {

namespace {

bool is_integer(double m) { return std::floor(m) == m; }

double checked_exp(double lp, const char* what) {
  if (!std::isfinite(lp) || lp > 709.0) {
    throw NumericalError(std::string(what) + ": location link overflows (linear predictor " +
                         std::to_string(lp) + ")");
  }
  return std::exp(lp);
}

}  // namespace

std::string_view to_string(MediatorFamily f) {
  switch (f) {
    case MediatorFamily::zilon: return "ZILoN";
    case MediatorFamily::zinb: return "ZINB";
    case MediatorFamily::zip: return "ZIP";
  }
  return "?";
}

MediatorFamily parse_family(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "zilon") return MediatorFamily::zilon;
  if (lower == "zinb") return MediatorFamily::zinb;
  if (lower == "zip") return MediatorFamily::zip;
  throw DomainError("unknown mediator family '" + std::string(s) + "'");
}

void validate(MediatorFamily family, const LinkParams& p) {
  for (double v : {p.alpha0, p.alpha1, p.gamma0, p.gamma1}) {
    if (!std::isfinite(v)) throw DomainError("link parameters must be finite");
  }
  if (family == MediatorFamily::zilon && !(p.sigma > 0.0 && std::isfinite(p.sigma))) {
    throw DomainError("ZILoN requires sigma > 0");
  }
  if (family == MediatorFamily::zinb && !(p.r > 0.0 && std::isfinite(p.r))) {
    throw DomainError("ZINB requires r > 0");
  }
}

MediatorLaw::MediatorLaw(MediatorFamily family, double location_lp, double zero_lp, double sigma,
                         double r)
    : family_(family), sigma_(sigma), r_(r) {
  log_delta_star_ = num::log_sigmoid(zero_lp);
  log_1m_delta_star_ = num::log_sigmoid(-zero_lp);
  switch (family) {
    case MediatorFamily::zilon:
      location_ = location_lp;
      log_p0_ = num::kNegInf;
      log_delta_ = log_delta_star_;
      log_1m_delta_ = log_1m_delta_star_;
      return;
    case MediatorFamily::zinb:
      location_ = checked_exp(location_lp, "ZINB");
      log_p0_ = -r * std::log1p(location_ / r);
      break;
    case MediatorFamily::zip:
      location_ = checked_exp(location_lp, "ZIP");
      log_p0_ = -location_;
      break;
  }
  log_delta_ = num::log_add_exp(log_delta_star_, log_1m_delta_star_ + log_p0_);
  log_1m_delta_ = log_1m_delta_star_ + num::log1m_exp(log_p0_);
}

MediatorLaw MediatorLaw::at(MediatorFamily family, const LinkParams& p, double x) {
  validate(family, p);
  return MediatorLaw(family, p.alpha0 + p.alpha1 * x, p.gamma0 + p.gamma1 * x, p.sigma, p.r);
}

double MediatorLaw::zero_prob() const { return std::exp(log_delta_); }

double MediatorLaw::structural_zero_prob() const { return std::exp(log_delta_star_); }

double MediatorLaw::mean() const {
  double v = 0.0;
  switch (family_) {
    case MediatorFamily::zilon:
      v = std::exp(log_1m_delta_ + location_ + 0.5 * sigma_ * sigma_);
      break;
    case MediatorFamily::zinb:
    case MediatorFamily::zip:
      v = std::exp(log_1m_delta_star_) * location_;
      break;
  }
  if (!std::isfinite(v)) throw NumericalError("mediator mean is not finite");
  return v;
}

double MediatorLaw::log_density_positive(double m) const {
  if (!(m > 0.0)) throw DomainError("positive-part density requires m > 0");
  switch (family_) {
    case MediatorFamily::zilon: {
      const double z = (std::log(m) - location_) / sigma_;
      return -std::log(m) - std::log(sigma_) - num::kLogSqrt2Pi - 0.5 * z * z;
    }
    case MediatorFamily::zinb: {
      if (!is_integer(m)) throw DomainError("ZINB mediator must be an integer");
      const double mu = location_;
      double rising;  // log[ Gamma(m + r) / Gamma(r) * (mu / (r + mu))^m ]
      if (m <= 10000.0) {
        // Product form stays accurate as r -> infinity, where the lgamma
        // difference cancels catastrophically.
        rising = m * std::log(mu);
        for (double j = 0.0; j < m; j += 1.0) rising += std::log1p((j - mu) / (r_ + mu));
      } else {
        rising = std::lgamma(m + r_) - std::lgamma(r_) + m * (std::log(mu) - std::log(r_ + mu));
      }
      return rising - std::lgamma(m + 1.0) + log_p0_ - num::log1m_exp(log_p0_);
    }
    case MediatorFamily::zip: {
      if (!is_integer(m)) throw DomainError("ZIP mediator must be an integer");
      const double lambda = location_;
      return m * std::log(lambda) - lambda - std::lgamma(m + 1.0) - num::log1m_exp(log_p0_);
    }
  }
  return num::kNegInf;
}

void MediatorLaw::log_count_masses(std::span<double> out) const {
  if (out.empty()) return;
  const double norm = num::log1m_exp(log_p0_);
  double log_pmf = log_p0_;
  if (family_ == MediatorFamily::zinb) {
    const double log_mu = std::log(location_);
    for (std::size_t k = 1; k <= out.size(); ++k) {
      const double kk = static_cast<double>(k);
      log_pmf += std::log1p((kk - 1.0 - location_) / (r_ + location_)) + log_mu - std::log(kk);
      out[k - 1] = log_pmf - norm;
    }
  } else if (family_ == MediatorFamily::zip) {
    const double log_lambda = std::log(location_);
    for (std::size_t k = 1; k <= out.size(); ++k) {
      log_pmf += log_lambda - std::log(static_cast<double>(k));
      out[k - 1] = log_pmf - norm;
    }
  } else {
    throw DomainError("log_count_masses is defined for count families only");
  }
}

double MediatorLaw::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  switch (family_) {
    case MediatorFamily::zilon: {
      if (std::log(u) < log_delta_) return 0.0;
      std::normal_distribution<double> z(location_, sigma_);
      return std::exp(z(rng));
    }
    case MediatorFamily::zinb: {
      if (std::log(u) < log_delta_star_) return 0.0;
      std::gamma_distribution<double> g(r_, location_ / r_);
      const double rate = g(rng);
      if (rate <= 0.0) return 0.0;
      std::poisson_distribution<long long> pois(rate);
      return static_cast<double>(pois(rng));
    }
    case MediatorFamily::zip: {
      if (std::log(u) < log_delta_star_) return 0.0;
      std::poisson_distribution<long long> pois(location_);
      return static_cast<double>(pois(rng));
    }
  }
  return 0.0;
}

double link_location(MediatorFamily family, const LinkParams& params, double x) {
  return MediatorLaw::at(family, params, x).location();
}

double zero_prob(MediatorFamily family, const LinkParams& params, double x) {
  return MediatorLaw::at(family, params, x).zero_prob();
}

double mediator_mean(MediatorFamily family, const LinkParams& params, double x) {
  return MediatorLaw::at(family, params, x).mean();
}

double log_density_positive(MediatorFamily family, const LinkParams& params, double x, double m) {
  return MediatorLaw::at(family, params, x).log_density_positive(m);
}

double sample_true_mediator(MediatorFamily family, const LinkParams& params, double x, Rng& rng) {
  return MediatorLaw::at(family, params, x).sample(rng);
}

}  // namespace zimed
