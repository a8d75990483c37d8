#include "zimed/likelihood.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <sstream>
#include <string>

#include "zimed/error.hpp"
#include "zimed/numeric.hpp"
#include "zimed/quadrature.hpp"

namespace zimed {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr int kGridPoints = 33;
constexpr double kWindowDrop = 46.0;  // exp(-46) ~ 1e-20 of the peak
constexpr int kMaxPanels = 200;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

template <class Fn>
void for_each_record(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  bool failed = false;
#pragma omp parallel for schedule(static) reduction(|| : failed)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
      failed = true;
    }
  }
  if (failed) {
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
}

}  // namespace

double RecordTerms::observed() const {
  if (positive) return log_1m_delta + l_pos;
  return num::log_add_exp(log_delta + l_true_zero, log_1m_delta + l_false_zero);
}

double RecordTerms::tau0() const {
  if (positive) return 0.0;
  const double a = log_delta + l_true_zero;
  const double b = log_1m_delta + l_false_zero;
  if (a == num::kNegInf && b == num::kNegInf) return 0.5;
  if (b == num::kNegInf) return 1.0;
  if (a == num::kNegInf) return 0.0;
  return num::sigmoid(a - b);
}

double RecordTerms::expected(double tau0) const {
  if (positive) return log_1m_delta + l_pos;
  double q = 0.0;
  if (tau0 > 0.0) q += tau0 * (log_delta + l_true_zero);
  if (tau0 < 1.0) q += (1.0 - tau0) * (log_1m_delta + l_false_zero);
  return q;
}

namespace {

// Posterior moments of the false-zero integrand, used by the gradient.
struct ZilonMoments {
  double res = 0.0;     // E[y - a - b m]
  double res_m = 0.0;   // E[(y - a - b m) m]
  double res2 = 0.0;    // E[(y - a - b m)^2]
  double zu = 0.0;      // E[u - mu]
  double zu2 = 0.0;     // E[(u - mu)^2]
  double m = 0.0;       // E[m]
};

double zilon_integral(double y, double a, double b, double delta, double mu, double sigma,
                      double eta2, double cap, ZilonMoments* mom) {
  const double upper = std::log(cap);
  const double inv2s2 = 0.5 / (sigma * sigma);
  const double inv2d2 = 0.5 / (delta * delta);
  auto g = [&](double u) {
    const double m = std::exp(u);
    const double zu = u - mu;
    const double res = y - a - b * m;
    return -zu * zu * inv2s2 - res * res * inv2d2 - eta2 * m;
  };

  // g <= -(u - mu)^2 / (2 sigma^2) since the other terms are <= 0, so with
  // g(u0) a lower bound on the maximum nothing outside mu +- h matters.
  const double u0 = std::min(mu, upper);
  double peak = g(u0);
  if (!std::isfinite(peak)) return num::kNegInf;
  const double h = sigma * std::sqrt(2.0 * (kWindowDrop - peak));
  const double lower = mu - h;
  const double hi = std::min(mu + h, upper);
  std::array<double, kGridPoints> grid{};
  const double step = (hi - lower) / (kGridPoints - 1);
  int best = 0;
  for (int k = 0; k < kGridPoints; ++k) {
    grid[k] = g(lower + step * k);
    if (grid[k] > grid[best]) best = k;
  }
  {
    // Golden section around the best grid point; keeps exp(g - peak) <= ~1.
    double l = lower + step * std::max(best - 1, 0);
    double r = lower + step * std::min(best + 1, kGridPoints - 1);
    constexpr double kInvPhi = 0.6180339887498949;
    double c = r - kInvPhi * (r - l), d = l + kInvPhi * (r - l);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 30; ++it) {
      if (gc > gd) {
        r = d, d = c, gd = gc;
        c = r - kInvPhi * (r - l), gc = g(c);
      } else {
        l = c, c = d, gc = gd;
        d = l + kInvPhi * (r - l), gd = g(d);
      }
    }
    peak = std::max({peak, grid[best], gc, gd});
  }
  int first = kGridPoints - 1;
  int last = 0;
  for (int k = 0; k < kGridPoints; ++k) {
    if (grid[k] >= peak - kWindowDrop) {
      first = std::min(first, k);
      last = std::max(last, k);
    }
  }
  if (first > last) first = last = best;
  const double ua = lower + step * std::max(first - 1, 0);
  const double ub = lower + step * std::min(last + 1, kGridPoints - 1);

  auto scaled = [&](double u) { return std::exp(g(u) - peak); };
  std::vector<std::array<double, 2>> panels;
  const quad::Result r = quad::integrate(scaled, ua, ub, kQuadTargetRelTol, kQuadAbsFloor, 2,
                                         kMaxPanels, mom ? &panels : nullptr);
  if (!r.converged && r.error > kQuadRelTol * std::abs(r.value)) {
    std::ostringstream msg;
    msg << "false-zero integral did not reach relative tolerance " << kQuadRelTol
        << " (value " << r.value << ", error " << r.error << ", panels " << r.panels
        << ", interval [" << ua << ", " << ub << "] in log m)";
    throw NumericalError(msg.str());
  }
  if (!(r.value > 0.0)) return num::kNegInf;

  if (mom) {
    ZilonMoments acc;
    double total = 0.0;
    for (const auto& pn : panels) {
      quad::kronrod_nodes(pn[0], pn[1], [&](double u, double w) {
        const double m = std::exp(u);
        const double zu = u - mu;
        const double res = y - a - b * m;
        const double f = w * std::exp(-zu * zu * inv2s2 - res * res * inv2d2 - eta2 * m - peak);
        total += f;
        acc.res += f * res;
        acc.res_m += f * res * m;
        acc.res2 += f * res * res;
        acc.zu += f * zu;
        acc.zu2 += f * zu * zu;
        acc.m += f * m;
      });
    }
    const double inv = 1.0 / total;
    *mom = {acc.res * inv, acc.res_m * inv, acc.res2 * inv, acc.zu * inv, acc.zu2 * inv, acc.m * inv};
  }
  return -kLog2Pi - std::log(delta) - std::log(sigma) + peak + std::log(r.value);
}

}  // namespace

double zilon_false_zero_term(double y, double a, double b, double delta, double mu, double sigma,
                             double eta2, double cap) {
  return zilon_integral(y, a, b, delta, mu, sigma, eta2, cap, nullptr);
}

RecordTerms record_terms(const Theta& th, const Record& rec, double cap) {
  const std::size_t p = th.n_confounders();
  const double out_off = p ? dot(th.outcome_z, rec.z) : 0.0;
  const double loc_off = p ? dot(th.location_z, rec.z) : 0.0;
  const double zero_off = p ? dot(th.zero_z, rec.z) : 0.0;
  const LinkParams& lk = th.link;
  const MediatorLaw law(th.family, lk.alpha0 + lk.alpha1 * rec.x + loc_off,
                        lk.gamma0 + lk.gamma1 * rec.x + zero_off, lk.sigma, lk.r);
  const FalseZeroMechanism mech{th.eta, cap};

  RecordTerms t;
  t.positive = rec.observed_positive();
  t.log_delta = law.log_zero_prob();
  t.log_1m_delta = law.log_nonzero_prob();

  if (t.positive) {
    t.l_pos = outcome_logpdf(th.outcome, rec.y, rec.x, rec.m_star, out_off) +
              mech.log_prob_observed_positive(rec.m_star) + law.log_density_positive(rec.m_star);
    return t;
  }

  t.l_true_zero = outcome_logpdf(th.outcome, rec.y, rec.x, 0.0, out_off);
  const auto& b = th.outcome.beta;
  const double a = b[0] + b[2] + (b[3] + b[4]) * rec.x + out_off;
  const double slope = b[1] + b[5] * rec.x;
  const double eta2 = mech.rate();

  if (th.family == MediatorFamily::zilon) {
    t.l_false_zero = zilon_false_zero_term(rec.y, a, slope, th.outcome.delta, law.location(),
                                           law.sigma(), eta2, cap);
    return t;
  }

  const auto kmax = static_cast<std::size_t>(std::floor(cap));
  if (kmax == 0) {
    t.l_false_zero = num::kNegInf;
    return t;
  }
  std::array<double, 64> stack_buf{};
  std::vector<double> heap_buf;
  std::span<double> terms;
  if (kmax <= stack_buf.size()) {
    terms = std::span<double>(stack_buf.data(), kmax);
  } else {
    heap_buf.resize(kmax);
    terms = heap_buf;
  }
  law.log_count_masses(terms);
  const double delta = th.outcome.delta;
  const double log_norm = -num::kLogSqrt2Pi - std::log(delta);
  for (std::size_t k = 1; k <= kmax; ++k) {
    const double m = static_cast<double>(k);
    const double z = (rec.y - a - slope * m) / delta;
    terms[k - 1] += log_norm - 0.5 * z * z - eta2 * m;
  }
  t.l_false_zero = num::log_sum_exp(terms);
  return t;
}

namespace {

// Derivatives of one record's contribution with respect to the scalars it
// depends on; scatter() maps them onto packed coordinates.
struct LocalGrad {
  std::array<double, 6> beta{};
  double log_delta = 0.0;  // outcome SD, log scale
  double loc = 0.0;        // location linear predictor
  double zero = 0.0;       // zero-inflation linear predictor
  double disp = 0.0;       // log sigma / log r
  double eta = 0.0;

  void add(double w, const LocalGrad& o) {
    for (std::size_t j = 0; j < 6; ++j) beta[j] += w * o.beta[j];
    log_delta += w * o.log_delta;
    loc += w * o.loc;
    zero += w * o.zero;
    disp += w * o.disp;
    eta += w * o.eta;
  }
};

struct RecordEval {
  double value = 0.0;
  LocalGrad grad;
};

// tau0 < 0: use the record's own posterior, giving the observed-data score.
RecordEval record_value_grad(const Theta& th, const Record& rec, double cap, double tau0_in) {
  const std::size_t p = th.n_confounders();
  const double out_off = p ? dot(th.outcome_z, rec.z) : 0.0;
  const double loc_off = p ? dot(th.location_z, rec.z) : 0.0;
  const double zero_off = p ? dot(th.zero_z, rec.z) : 0.0;
  const LinkParams& lk = th.link;
  const MediatorLaw law(th.family, lk.alpha0 + lk.alpha1 * rec.x + loc_off,
                        lk.gamma0 + lk.gamma1 * rec.x + zero_off, lk.sigma, lk.r);
  const FalseZeroMechanism mech{th.eta, cap};
  const double x = rec.x;
  const double inv_d2 = 1.0 / (th.outcome.delta * th.outcome.delta);
  const bool zilon = th.family == MediatorFamily::zilon;
  const double ld = law.log_zero_prob();
  const double l1md = law.log_nonzero_prob();

  auto add_outcome = [&](LocalGrad& g, double w, double m) {
    const double res = rec.y - outcome_mean(th.outcome, x, m, out_off);
    const double dm = w * res * inv_d2;
    const double ind = m > 0.0 ? 1.0 : 0.0;
    g.beta[0] += dm;
    g.beta[1] += dm * m;
    g.beta[2] += dm * ind;
    g.beta[3] += dm * x;
    g.beta[4] += dm * x * ind;
    g.beta[5] += dm * x * m;
    g.log_delta += w * (res * res * inv_d2 - 1.0);
  };

  // d log(Delta) and d log(1 - Delta).
  LocalGrad d_ld;
  LocalGrad d_l1md;
  double mu = law.location();
  double r = law.r();
  double dlp0_loc = 0.0;
  double dlp0_disp = 0.0;
  double odds_p0 = 0.0;  // p0 / (1 - p0)
  if (zilon) {
    d_ld.zero = std::exp(l1md);
    d_l1md.zero = -std::exp(ld);
  } else {
    const double lp0 = law.log_count_zero();
    if (th.family == MediatorFamily::zip) {
      dlp0_loc = -mu;
    } else {
      dlp0_loc = -r * mu / (r + mu);
      dlp0_disp = r * (mu / (r + mu) - std::log1p(mu / r));
    }
    odds_p0 = std::exp(lp0 - num::log1m_exp(lp0));
    d_l1md.zero = -law.structural_zero_prob();
    d_l1md.loc = -odds_p0 * dlp0_loc;
    d_l1md.disp = -odds_p0 * dlp0_disp;
    const double wp = std::exp(law.log_structural_nonzero_prob() + lp0 - ld);
    d_ld.zero = std::exp(law.log_structural_zero_prob() + l1md - ld);
    d_ld.loc = wp * dlp0_loc;
    d_ld.disp = wp * dlp0_disp;
  }

  // d log G(k) for a count k, G the zero-truncated mass.
  auto add_count_density = [&](LocalGrad& g, double w, double k, double digamma_diff) {
    if (th.family == MediatorFamily::zip) {
      g.loc += w * (k - mu + odds_p0 * dlp0_loc);
      return;
    }
    const double q = r / (r + mu);
    g.loc += w * (dlp0_loc + k * q + odds_p0 * dlp0_loc);
    g.disp += w * (dlp0_disp + r * digamma_diff - k * q + odds_p0 * dlp0_disp);
  };

  RecordEval ev;
  LocalGrad& g = ev.grad;

  if (rec.observed_positive()) {
    const double m = rec.m_star;
    // Same association as record_terms so values agree bit for bit.
    const double l_pos = outcome_logpdf(th.outcome, rec.y, x, m, out_off) +
                         mech.log_prob_observed_positive(m) + law.log_density_positive(m);
    ev.value = l1md + l_pos;
    g.add(1.0, d_l1md);
    add_outcome(g, 1.0, m);
    if (m <= cap) {
      const double rate = mech.rate() * m;
      g.eta += 2.0 * th.eta * m * std::exp(-rate - num::log1m_exp(-rate));
    }
    if (zilon) {
      const double z = (std::log(m) - mu) / law.sigma();
      g.loc += z / law.sigma();
      g.disp += z * z - 1.0;
    } else {
      double dg = 0.0;
      if (th.family == MediatorFamily::zinb) {
        for (double j = 0.0; j < m; j += 1.0) dg += 1.0 / (r + j);
      }
      add_count_density(g, 1.0, m, dg);
    }
    return ev;
  }

  RecordTerms t;
  t.log_delta = ld;
  t.log_1m_delta = l1md;
  t.l_true_zero = outcome_logpdf(th.outcome, rec.y, x, 0.0, out_off);
  const auto& b = th.outcome.beta;
  const double a = b[0] + b[2] + (b[3] + b[4]) * x + out_off;
  const double slope = b[1] + b[5] * x;
  const double eta2 = mech.rate();

  LocalGrad fz;
  if (zilon) {
    ZilonMoments mom;
    t.l_false_zero = zilon_integral(rec.y, a, slope, th.outcome.delta, mu, law.sigma(), eta2,
                                    cap, &mom);
    if (t.l_false_zero != num::kNegInf) {
      const double da = mom.res * inv_d2;
      const double db = mom.res_m * inv_d2;
      const double s2 = law.sigma() * law.sigma();
      fz.beta = {da, db, da, da * x, da * x, db * x};
      fz.log_delta = mom.res2 * inv_d2 - 1.0;
      fz.loc = mom.zu / s2;
      fz.disp = mom.zu2 / s2 - 1.0;
      fz.eta = -2.0 * th.eta * mom.m;
    }
  } else {
    const auto kmax = static_cast<std::size_t>(std::floor(cap));
    if (kmax == 0) {
      t.l_false_zero = num::kNegInf;
    } else {
      std::array<double, 64> stack_buf{};
      std::vector<double> heap_buf;
      std::span<double> terms;
      if (kmax <= stack_buf.size()) {
        terms = std::span<double>(stack_buf.data(), kmax);
      } else {
        heap_buf.resize(kmax);
        terms = heap_buf;
      }
      law.log_count_masses(terms);
      const double delta = th.outcome.delta;
      const double log_norm = -num::kLogSqrt2Pi - std::log(delta);
      for (std::size_t k = 1; k <= kmax; ++k) {
        const double m = static_cast<double>(k);
        const double z = (rec.y - a - slope * m) / delta;
        terms[k - 1] += log_norm - 0.5 * z * z - eta2 * m;
      }
      t.l_false_zero = num::log_sum_exp(terms);
      if (t.l_false_zero != num::kNegInf) {
        double dg = 0.0;
        for (std::size_t k = 1; k <= kmax; ++k) {
          const double m = static_cast<double>(k);
          if (th.family == MediatorFamily::zinb) dg += 1.0 / (r + m - 1.0);
          const double w = std::exp(terms[k - 1] - t.l_false_zero);
          if (w == 0.0) continue;
          add_outcome(fz, w, m);
          add_count_density(fz, w, m, dg);
          fz.eta += w * (-2.0 * th.eta * m);
        }
      }
    }
  }

  const bool self = tau0_in < 0.0;
  const double tau0 = self ? t.tau0() : tau0_in;
  ev.value = self ? t.observed() : t.expected(tau0);
  if (tau0 > 0.0) {
    g.add(tau0, d_ld);
    add_outcome(g, tau0, 0.0);
  }
  if (tau0 < 1.0) {
    g.add(1.0 - tau0, d_l1md);
    g.add(1.0 - tau0, fz);
  }
  return ev;
}

void scatter(const LocalGrad& lg, const Theta& th, const Record& rec, Eigen::VectorXd& out) {
  for (int j = 0; j < 6; ++j) out[j] += lg.beta[static_cast<std::size_t>(j)];
  out[kLogDeltaIndex] += lg.log_delta;
  out[7] += lg.loc;
  out[8] += lg.loc * rec.x;
  out[9] += lg.zero;
  out[10] += lg.zero * rec.x;
  if (const int d = dispersion_index(th.family); d >= 0) out[d] += lg.disp;
  const int e = eta_index(th.family);
  out[e] += lg.eta;
  const auto p = static_cast<Eigen::Index>(th.n_confounders());
  for (Eigen::Index j = 0; j < p; ++j) {
    const double z = rec.z[static_cast<std::size_t>(j)];
    out[e + 1 + j] += lg.beta[0] * z;
    out[e + 1 + p + j] += lg.loc * z;
    out[e + 1 + 2 * p + j] += lg.zero * z;
  }
}

double value_and_gradient(const Theta& theta, const Dataset& data, const double* tau0,
                          double cap, Exec exec, Eigen::VectorXd& grad) {
  std::vector<RecordEval> evals(data.size());
  for_each_record(data.size(), exec, [&](std::size_t i) {
    try {
      evals[i] = record_value_grad(theta, data[i], cap, tau0 ? tau0[i] : -1.0);
    } catch (const Error& e) {
      throw NumericalError("record " + std::to_string(i + 1) + ": " + e.what());
    }
  });
  grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(theta.dimension()));
  std::vector<double> values(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    values[i] = evals[i].value;
    scatter(evals[i].grad, theta, data[i], grad);
  }
  return num::pairwise_sum(values);
}

}  // namespace

double q_given_tau_grad(const Theta& theta, const Dataset& data, std::span<const double> tau0,
                        double cap, Exec exec, Eigen::VectorXd& grad) {
  if (tau0.size() != data.size()) throw DomainError("responsibility vector has wrong length");
  return value_and_gradient(theta, data, tau0.data(), cap, exec, grad);
}

double observed_loglik_grad(const Theta& theta, const Dataset& data, double cap, Exec exec,
                            Eigen::VectorXd& grad) {
  return value_and_gradient(theta, data, nullptr, cap, exec, grad);
}

double loglik_pos(const Theta& theta, const Record& rec, double cap) {
  if (!rec.observed_positive()) throw DomainError("loglik_pos requires m* > 0");
  const RecordTerms t = record_terms(theta, rec, cap);
  if (t.l_pos == num::kNegInf) {
    throw NumericalError(
        "degenerate likelihood: positive m* is impossible when eta = 0 and m* <= B");
  }
  return t.l_pos;
}

double loglik_true_zero(const Theta& theta, const Record& rec) {
  if (rec.observed_positive()) throw DomainError("loglik_true_zero requires m* = 0");
  return record_terms(theta, rec, kDefaultCap).l_true_zero;
}

double loglik_false_zero(const Theta& theta, const Record& rec, double cap) {
  if (rec.observed_positive()) throw DomainError("loglik_false_zero requires m* = 0");
  return record_terms(theta, rec, cap).l_false_zero;
}

Responsibilities responsibilities(const Theta& theta, const Record& rec, double cap) {
  if (rec.observed_positive()) throw DomainError("responsibilities require m* = 0");
  const double t0 = record_terms(theta, rec, cap).tau0();
  return {t0, 1.0 - t0};
}

namespace {

template <class PerRecord>
std::vector<double> map_records(const Dataset& data, Exec exec, PerRecord&& per_record) {
  std::vector<double> out(data.size());
  for_each_record(data.size(), exec, [&](std::size_t i) {
    try {
      out[i] = per_record(i);
    } catch (const Error& e) {
      throw NumericalError("record " + std::to_string(i + 1) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace

std::vector<double> e_step(const Theta& theta, const Dataset& data, double cap, Exec exec) {
  return map_records(data, exec, [&](std::size_t i) {
    return record_terms(theta, data[i], cap).tau0();
  });
}

double q_given_tau(const Theta& theta, const Dataset& data, std::span<const double> tau0,
                   double cap, Exec exec) {
  if (tau0.size() != data.size()) throw DomainError("responsibility vector has wrong length");
  const auto terms = map_records(data, exec, [&](std::size_t i) {
    return record_terms(theta, data[i], cap).expected(tau0[i]);
  });
  return num::pairwise_sum(terms);
}

double q_function(const Theta& theta, const Theta& theta0, const Dataset& data, double cap,
                  Exec exec) {
  if (theta.family != theta0.family) throw DomainError("Q requires parameters of one family");
  const auto tau = e_step(theta0, data, cap, exec);
  return q_given_tau(theta, data, tau, cap, exec);
}

std::vector<double> observed_loglik_terms(const Theta& theta, const Dataset& data, double cap,
                                          Exec exec) {
  return map_records(data, exec, [&](std::size_t i) {
    return record_terms(theta, data[i], cap).observed();
  });
}

double observed_loglik(const Theta& theta, const Dataset& data, double cap, Exec exec) {
  return num::pairwise_sum(observed_loglik_terms(theta, data, cap, exec));
}

}  // namespace zimed
