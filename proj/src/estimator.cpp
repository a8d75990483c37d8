#include "zimed/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "zimed/error.hpp"
#include "zimed/finite_diff.hpp"
#include "zimed/numeric.hpp"

namespace zimed {

namespace {

Eigen::VectorXd least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  return X.completeOrthogonalDecomposition().solve(y);
}

// Newton-Raphson logistic regression with a small ridge; coefficients are
// clamped so separable data (no zeros at all) still yields a usable start.
Eigen::VectorXd logistic_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& t) {
  const Eigen::Index p = X.cols();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  for (int it = 0; it < 30; ++it) {
    const Eigen::VectorXd eta = X * b;
    Eigen::VectorXd mu(eta.size());
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu[i] = num::sigmoid(eta[i]);
      w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
    }
    Eigen::MatrixXd XtWX = X.transpose() * w.asDiagonal() * X;
    XtWX.diagonal().array() += 1e-6;
    const Eigen::VectorXd step = XtWX.ldlt().solve(X.transpose() * (t - mu));
    b += step;
    b = b.cwiseMax(-10.0).cwiseMin(10.0);
    if (step.cwiseAbs().maxCoeff() < 1e-8) break;
  }
  return b;
}

void flag_boundary(const Dataset& data, const Theta& th, FitResult& out) {
  double lo = 1.0;
  double hi = 0.0;
  const std::size_t p = th.n_confounders();
  for (const Record& r : data.records()) {
    double lp = th.link.gamma0 + th.link.gamma1 * r.x;
    for (std::size_t j = 0; j < p; ++j) lp += th.zero_z[j] * r.z[j];
    const double d = num::sigmoid(lp);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (lo < kBoundaryEps || hi > 1.0 - kBoundaryEps) {
    out.boundary = true;
    out.covariance_unreliable = true;
    out.warnings.emplace_back(
        "zero-inflation probability at the boundary; standard errors of gamma are unreliable");
  }
}

}  // namespace

MStepResult m_step(const std::function<double(const Eigen::VectorXd&)>& q,
                   const Eigen::VectorXd& x0, double mstep_tol, int max_iters,
                   opt::BfgsMemory* memory) {
  opt::BfgsOptions o;
  auto fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    if (grad) *grad = fd::central_gradient(q, x, o.fd_step);
    return q(x);
  };
  return m_step(opt::ValueGradient(fg), x0, mstep_tol, max_iters, memory);
}

MStepResult m_step(const opt::ValueGradient& q, const Eigen::VectorXd& x0, double mstep_tol,
                   int max_iters, opt::BfgsMemory* memory, const Eigen::VectorXd& lower,
                   const Eigen::VectorXd& upper) {
  opt::BfgsOptions o;
  o.grad_tol = mstep_tol;
  o.max_iter = max_iters;
  o.lower = lower;
  o.upper = upper;
  const opt::BfgsResult r = opt::maximize(q, x0, o, memory);
  MStepResult out;
  out.q_start = q(x0, nullptr);
  out.iterations = r.iterations;
  out.converged = r.converged;
  if (r.stalled || !(r.f >= out.q_start)) {
    out.x = x0;
    out.q = out.q_start;
    out.stalled = true;
    return out;
  }
  out.x = r.x;
  out.q = r.f;
  return out;
}

void check_identifiable(const Dataset& data, MediatorFamily family) {
  if (data.empty()) throw EstimationError("dataset is empty");
  if (data.n_positive() == 0) {
    throw EstimationError("no positive mediator values; the mediator law is not identifiable");
  }
  const double x0 = data[0].x;
  const bool constant_x = std::all_of(data.records().begin(), data.records().end(),
                                      [&](const Record& r) { return r.x == x0; });
  if (constant_x) throw EstimationError("independent variable x is constant");
  if (is_count_family(family) && !data.integer_mediator()) {
    throw EstimationError(std::string(to_string(family)) +
                          " requires integer mediator values");
  }
}

Theta heuristic_init(const Dataset& data, MediatorFamily family) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto p = static_cast<Eigen::Index>(data.n_confounders());

  Theta th;
  th.family = family;
  th.eta = 1.0;

  Eigen::MatrixXd Xo(n, 6 + p);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd Xz(n, 2 + p);
  Eigen::VectorXd zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Record& r = data[static_cast<std::size_t>(i)];
    const double ind = r.m_star > 0 ? 1.0 : 0.0;
    Xo.row(i).head(6) << 1.0, r.m_star, ind, r.x, r.x * ind, r.x * r.m_star;
    Xz(i, 0) = 1.0;
    Xz(i, 1) = r.x;
    for (Eigen::Index j = 0; j < p; ++j) {
      Xo(i, 6 + j) = r.z[static_cast<std::size_t>(j)];
      Xz(i, 2 + j) = r.z[static_cast<std::size_t>(j)];
    }
    y[i] = r.y;
    zero[i] = 1.0 - ind;
  }

  const Eigen::VectorXd b = least_squares(Xo, y);
  for (int j = 0; j < 6; ++j) th.outcome.beta[static_cast<std::size_t>(j)] = b[j];
  const double rss = (y - Xo * b).squaredNorm();
  th.outcome.delta = std::max(std::sqrt(rss / static_cast<double>(n)), 1e-3);
  th.outcome_z.assign(b.data() + 6, b.data() + 6 + p);

  const Eigen::VectorXd g = logistic_fit(Xz, zero);
  th.link.gamma0 = g[0];
  th.link.gamma1 = g[1];
  th.zero_z.assign(g.data() + 2, g.data() + 2 + p);

  const auto npos = static_cast<Eigen::Index>(data.n_positive());
  Eigen::MatrixXd Xm(npos, 2 + p);
  Eigen::VectorXd lm(npos);
  Eigen::VectorXd mpos(npos);
  for (Eigen::Index i = 0, k = 0; i < n; ++i) {
    const Record& r = data[static_cast<std::size_t>(i)];
    if (!(r.m_star > 0.0)) continue;
    Xm.row(k) = Xz.row(i);
    lm[k] = std::log(r.m_star);
    mpos[k] = r.m_star;
    ++k;
  }
  const Eigen::VectorXd a = least_squares(Xm, lm);
  th.link.alpha0 = a[0];
  th.link.alpha1 = std::isfinite(a[1]) ? a[1] : 0.0;
  th.location_z.assign(a.data() + 2, a.data() + 2 + p);
  const double resid_sd =
      npos > 1 ? std::sqrt((lm - Xm * a).squaredNorm() / static_cast<double>(npos)) : 1.0;
  th.link.sigma = std::max(resid_sd, 0.05);

  const double mean = mpos.mean();
  const double var = npos > 1 ? (mpos.array() - mean).square().sum() / static_cast<double>(npos - 1)
                              : mean;
  if (family != MediatorFamily::zilon) {
    // Center log(mu) on the positive mean rather than the mean of log m*.
    th.link.alpha0 += std::log(mean) - lm.mean();
  }
  th.link.r = var > mean ? std::clamp(mean * mean / (var - mean), 0.1, 100.0) : 100.0;
  return th;
}

Eigen::MatrixXd observed_information(const Dataset& data, const Theta& theta_hat, double cap,
                                     Exec exec) {
  const MediatorFamily fam = theta_hat.family;
  const std::size_t p = theta_hat.n_confounders();
  auto score = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd g;
    observed_loglik_grad(Theta::unpack(fam, p, v), data, cap, exec, g);
    return g;
  };
  const Eigen::MatrixXd jac = fd::central_jacobian(score, theta_hat.pack(), kInformationStep);
  return -0.5 * (jac + jac.transpose());
}

namespace {

struct EmRun {
  Eigen::VectorXd start;
  Eigen::VectorXd x;
  double ll = 0.0;
  std::vector<double> trace;
  int n_iters = 0;
  bool converged = false;
  int stalled = 0;
  std::vector<std::string> warnings;
};

EmRun run_em(Eigen::VectorXd x, const Dataset& data, MediatorFamily family, const FitConfig& cfg,
             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const std::size_t p = data.n_confounders();
  auto unpack = [&](const Eigen::VectorXd& v) { return Theta::unpack(family, p, v); };
  auto observed = [&](const Eigen::VectorXd& v) {
    return observed_loglik(unpack(v), data, cfg.cap, cfg.exec);
  };

  EmRun out;
  double ll = observed(x);
  if (!std::isfinite(ll)) {
    // eta = 0 makes small positive m* impossible; nudge the start away.
    Theta t = unpack(x);
    if (t.eta == 0.0) t.eta = 1.0;
    x = t.pack();
    ll = observed(x);
    if (!std::isfinite(ll)) {
      throw EstimationError("observed log-likelihood is not finite at the starting values");
    }
  }
  out.start = x;
  out.trace.push_back(ll);

  opt::BfgsMemory memory;
  bool first = true;
  for (int it = 1; it <= cfg.max_em_iters; ++it) {
    const std::vector<double> tau = e_step(unpack(x), data, cfg.cap, cfg.exec);
    auto q = [&](const Eigen::VectorXd& v, Eigen::VectorXd* grad) {
      if (!grad) {
        // Line-search probes outside the working domain count as -inf.
        if (!v.allFinite()) return num::kNegInf;
        try {
          return q_given_tau(unpack(v), data, tau, cfg.cap, cfg.exec);
        } catch (const NumericalError&) {
          return num::kNegInf;
        }
      }
      return q_given_tau_grad(unpack(v), data, tau, cfg.cap, cfg.exec, *grad);
    };
    if (first) {
      // Seed the quasi-Newton metric with the curvature of the first Q.
      auto q_grad = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd g;
        q(v, &g);
        return g;
      };
      const Eigen::MatrixXd hess = fd::central_jacobian(q_grad, x, 1e-4);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-0.5 * (hess + hess.transpose()));
      Eigen::VectorXd ev = es.eigenvalues();
      for (Eigen::Index i = 0; i < ev.size(); ++i) {
        ev[i] = 1.0 / std::max(std::abs(ev[i]), 1e-6);
      }
      memory.inverse_curvature = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
      first = false;
    }
    const MStepResult ms = m_step(opt::ValueGradient(q), x, cfg.mstep_tol, cfg.mstep_max_iters, &memory,
                                  lower, upper);
    out.n_iters = it;
    if (ms.stalled) {
      ++out.stalled;
      out.converged = true;
      out.warnings.emplace_back("M step could not improve Q; stopped at iteration " +
                                std::to_string(it));
      break;
    }
    x = ms.x;
    const double ll_new = observed(x);
    out.trace.push_back(ll_new);
    const double change = ll_new - ll;
    ll = ll_new;
    if (std::abs(change) < cfg.em_tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    out.warnings.emplace_back("EM reached the iteration cap without converging");
  }
  out.x = x;
  out.ll = ll;
  return out;
}

// EM started with eta too large can settle where every zero is a true zero:
// the eta gradient vanishes there. Returns a restart value for eta when that
// happened (0 otherwise): eta^2 = 1 / mean of the positive m* up to the cap.
double degenerate_restart_eta(const Dataset& data, const EmRun& run, MediatorFamily family,
                              std::size_t p, double cap) {
  if (data.n_zero() == 0) return 0.0;
  const double eta = Theta::unpack(family, p, run.x).eta;
  if (eta * eta < kDegenerateRate) return 0.0;
  double sum = 0.0;
  std::size_t n = 0;
  for (const Record& r : data.records()) {
    if (r.m_star > 0.0 && r.m_star <= cap) {
      sum += r.m_star;
      ++n;
    }
  }
  if (n == 0) return 0.0;
  return 1.0 / std::sqrt(sum / static_cast<double>(n));
}

}  // namespace

CovarianceResult invert_information(const Eigen::MatrixXd& info) {
  const Eigen::MatrixXd sym = 0.5 * (info + info.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  const double floor = 1e-10 * std::max(top, 1e-300);
  CovarianceResult out;
  Eigen::VectorXd inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > floor) {
      inv[i] = 1.0 / ev[i];
    } else {
      inv[i] = 0.0;
      out.pseudo_inverse = true;
    }
  }
  out.covariance = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

FitResult fit(const Dataset& data, MediatorFamily family, const FitConfig& cfg) {
  check_identifiable(data, family);
  if (cfg.max_em_iters < 1) throw DomainError("max_em_iters must be at least 1");
  if (!(cfg.em_tol > 0.0) || !(cfg.mstep_tol > 0.0)) throw DomainError("tolerances must be positive");
  if (!(cfg.cap > 0.0)) throw DomainError("false-zero cap B must be positive");

  const std::size_t p = data.n_confounders();
  if (!(cfg.eta_init > 0.0) || !std::isfinite(cfg.eta_init)) throw DomainError("eta_init must be positive");
  Theta start = cfg.init ? *cfg.init : heuristic_init(data, family);
  if (!cfg.init) start.eta = cfg.eta_init;
  if (start.family != family || start.n_confounders() != p) {
    throw DomainError("initial parameters do not match the family or confounder count");
  }
  start.validate();

  auto unpack = [&](const Eigen::VectorXd& v) { return Theta::unpack(family, p, v); };
  const int disp = dispersion_index(family);
  const auto dim = static_cast<Eigen::Index>(theta_dimension(family, p));
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(dim, -std::numeric_limits<double>::infinity());
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::infinity());
  for (int j : {kLogDeltaIndex, disp}) {
    if (j < 0) continue;
    lower[j] = -kMaxLogScale;
    upper[j] = kMaxLogScale;
  }
  FitResult out;
  out.cap = cfg.cap;
  EmRun run = run_em(start.pack().cwiseMax(lower).cwiseMin(upper), data, family, cfg, lower, upper);
  const double restart_eta = degenerate_restart_eta(data, run, family, p, cfg.cap);
  if (restart_eta > 0.0) {
    Theta t = unpack(run.start);
    t.eta = restart_eta;
    EmRun second = run_em(t.pack(), data, family, cfg, lower, upper);
    std::ostringstream msg;
    msg << "eta^2 reached " << kDegenerateRate << " (false zeros ruled out); restarted EM from eta = "
        << restart_eta << ": log-likelihood " << run.ll << " vs " << second.ll << ", kept the "
        << (second.ll > run.ll ? "restart" : "first run");
    if (second.ll > run.ll) run = std::move(second);
    run.warnings.push_back(msg.str());
  }
  out.loglik_trace = run.trace;
  out.n_iters = run.n_iters;
  out.converged = run.converged;
  out.stalled_msteps = run.stalled;
  out.warnings = run.warnings;
  const Eigen::VectorXd x = run.x;
  const double ll = run.ll;
  out.theta_hat = unpack(x);
  out.loglik = ll;
  out.n_params = static_cast<int>(x.size());
  out.aic = 2.0 * out.n_params - 2.0 * ll;
  out.median_positive_m = data.median_positive_mediator();
  out.n_obs = data.size();
  out.n_zero = data.n_zero();
  if (p > 0) {
    out.confounder_rows.reserve(data.size());
    for (const Record& r : data.records()) out.confounder_rows.push_back(r.z);
  }

  flag_boundary(data, out.theta_hat, out);
  if (disp >= 0 && std::abs(x[disp]) > kMaxLogScale - 1.0) {
    out.boundary = true;
    out.covariance_unreliable = true;
    out.warnings.emplace_back(std::string(family == MediatorFamily::zinb ? "r" : "sigma") +
                              " reached the edge of the working range (log scale " +
                              std::to_string(kMaxLogScale) + ")");
  }

  const Eigen::Index k = x.size();
  out.covariance = Eigen::MatrixXd::Zero(k, k);
  out.std_errors = Eigen::VectorXd::Zero(k);
  if (cfg.compute_covariance) {
    const Eigen::MatrixXd info = observed_information(data, out.theta_hat, cfg.cap, cfg.exec);
    const CovarianceResult cov = invert_information(info);
    out.covariance = cov.covariance;
    if (cov.pseudo_inverse) {
      out.covariance_unreliable = true;
      out.warnings.emplace_back("information matrix is singular or indefinite; used pseudo-inverse");
    }
    // Natural-scale SEs: the packed -> natural map is the identity except
    // for exp() on log-scale coordinates.
    Eigen::VectorXd jac = Eigen::VectorXd::Ones(k);
    const Eigen::VectorXd nat = out.theta_hat.natural();
    jac[kLogDeltaIndex] = nat[kLogDeltaIndex];
    if (const int d = dispersion_index(family); d >= 0) jac[d] = nat[d];
    for (Eigen::Index j = 0; j < k; ++j) {
      out.std_errors[j] = jac[j] * std::sqrt(std::max(out.covariance(j, j), 0.0));
    }
  }
  return out;
}

}  // namespace zimed
