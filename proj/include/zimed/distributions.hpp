#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace zimed {

using Rng = std::mt19937_64;

enum class MediatorFamily { zilon, zinb, zip };

std::string_view to_string(MediatorFamily f);
// Accepts "zilon", "ZILoN", "zinb", ... (case-insensitive).
MediatorFamily parse_family(std::string_view s);

inline bool is_count_family(MediatorFamily f) { return f != MediatorFamily::zilon; }

// Regression parameters of the two-part mediator law.
//
// ZILoN:  mu = alpha0 + alpha1 x        (log-scale mean)
//         logit(Delta)  = gamma0 + gamma1 x   (total zero probability)
// ZINB:   log(mu)     = alpha0 + alpha1 x
//         logit(Delta*) = gamma0 + gamma1 x   (structural zeros only)
// ZIP:    log(lambda) = alpha0 + alpha1 x
//         logit(Delta*) = gamma0 + gamma1 x
//
// sigma is read only for ZILoN and r only for ZINB.
struct LinkParams {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double sigma = 1.0;
  double r = 1.0;
};

void validate(MediatorFamily family, const LinkParams& params);

// The mediator distribution for one subject, built from the two linear
// predictors. Confounders are folded into the predictors by the caller.
class MediatorLaw {
 public:
  MediatorLaw(MediatorFamily family, double location_lp, double zero_lp, double sigma, double r);

  static MediatorLaw at(MediatorFamily family, const LinkParams& params, double x);

  MediatorFamily family() const { return family_; }
  // mu for ZILoN (log scale) and ZINB, lambda for ZIP.
  double location() const { return location_; }
  double sigma() const { return sigma_; }
  double r() const { return r_; }

  // Total probability that the true mediator is zero, and its complement,
  // both on the log scale.
  double log_zero_prob() const { return log_delta_; }
  double log_nonzero_prob() const { return log_1m_delta_; }
  double zero_prob() const;
  // Excess-zero probability; equals zero_prob() for ZILoN.
  double structural_zero_prob() const;
  double log_structural_zero_prob() const { return log_delta_star_; }
  double log_structural_nonzero_prob() const { return log_1m_delta_star_; }
  // log P(count = 0) of the un-inflated count law; -inf for ZILoN.
  double log_count_zero() const { return log_p0_; }

  double mean() const;

  // log G(m), the density (ZILoN) or mass (ZINB/ZIP) of M given M > 0.
  double log_density_positive(double m) const;

  // Fills out[k-1] = log G(k) for k = 1..out.size(). Count families only;
  // uses the pmf ratio recurrence.
  void log_count_masses(std::span<double> out) const;

  double sample(Rng& rng) const;

 private:
  MediatorFamily family_;
  double location_;
  double sigma_;
  double r_;
  double log_delta_star_;
  double log_1m_delta_star_;
  double log_p0_;  // count family's own log mass at zero; -inf for ZILoN
  double log_delta_;
  double log_1m_delta_;
};

double link_location(MediatorFamily family, const LinkParams& params, double x);
double zero_prob(MediatorFamily family, const LinkParams& params, double x);
double mediator_mean(MediatorFamily family, const LinkParams& params, double x);
double log_density_positive(MediatorFamily family, const LinkParams& params, double x, double m);
double sample_true_mediator(MediatorFamily family, const LinkParams& params, double x, Rng& rng);

}  // namespace zimed
