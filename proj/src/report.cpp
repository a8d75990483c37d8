#include "zimed/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace zimed {

namespace {

// Fixed printed precision shared by the table and CSV outputs.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string status_of(const FamilyOutcome& c, MediatorFamily chosen) {
  if (!c.fit) return c.note.rfind("skipped", 0) == 0 ? "skipped" : "failed";
  if (!c.fit->converged) return "excluded";
  return c.family == chosen ? "chosen" : "fitted";
}

std::vector<std::string> all_warnings(const Selection& sel, const EffectEstimates& eff) {
  std::vector<std::string> w = sel.chosen_fit().warnings;
  w.insert(w.end(), eff.warnings.begin(), eff.warnings.end());
  return w;
}

}  // namespace

int fit_exit_code(const Selection& sel) {
  const FitResult& f = sel.chosen_fit();
  return f.converged && !f.covariance_unreliable ? 0 : 1;
}

Json fit_report_json(const FitContext& ctx, const Selection& sel, const EffectEstimates& eff) {
  const FitResult& fit = sel.chosen_fit();
  Json j;
  j["report"] = "fit";
  j["schema_version"] = kReportSchemaVersion;
  j["seed"] = ctx.seed;

  Json cols;
  cols["y"] = ctx.columns.y;
  cols["m"] = ctx.columns.m;
  cols["x"] = ctx.columns.x;
  cols["z"] = ctx.columns.z;
  j["input"] = {{"path", ctx.input_path},
                {"columns", cols},
                {"n_obs", ctx.n_obs},
                {"n_zero", ctx.n_zero},
                {"integer_mediator", ctx.integer_mediator}};
  j["settings"] = {{"family", ctx.family_request},
                   {"B", ctx.cap},
                   {"eta_init", ctx.eta_init},
                   {"ci_level", eff.ci_level},
                   {"x1", eff.x1},
                   {"x2", eff.x2},
                   {"cde_m", eff.cde_m}};

  Json cands = Json::array();
  for (const auto& c : sel.candidates) {
    Json e;
    e["family"] = std::string(to_string(c.family));
    e["status"] = status_of(c, sel.chosen);
    e["loglik"] = c.fit ? number_or_null(c.fit->loglik) : Json(nullptr);
    e["n_params"] = c.fit ? Json(c.fit->n_params) : Json(nullptr);
    e["aic"] = c.fit ? number_or_null(c.fit->aic) : Json(nullptr);
    e["converged"] = c.fit ? Json(c.fit->converged) : Json(nullptr);
    e["note"] = c.note;
    cands.push_back(std::move(e));
  }
  j["selection"] = {{"criterion", "AIC"},
                    {"chosen", std::string(to_string(sel.chosen))},
                    {"candidates", cands}};

  Json params = Json::array();
  const auto names = fit.theta_hat.names();
  const Eigen::VectorXd nat = fit.theta_hat.natural();
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    params.push_back({{"name", names[k]},
                      {"estimate", nat[i]},
                      {"se", number_or_null(fit.std_errors.size() > i ? fit.std_errors[i] : NAN)}});
  }
  j["parameters"] = params;

  Json effects = Json::array();
  for (Effect e : kAllEffects) {
    const EffectEstimate& v = eff[e];
    effects.push_back({{"effect", std::string(to_string(e))},
                       {"estimate", v.estimate},
                       {"se", v.se},
                       {"ci_lower", v.lower},
                       {"ci_upper", v.upper},
                       {"p_value", v.p_value}});
  }
  j["effects"] = effects;

  j["diagnostics"] = {{"converged", fit.converged},
                      {"em_iterations", fit.n_iters},
                      {"loglik", fit.loglik},
                      {"loglik_trace", fit.loglik_trace},
                      {"covariance_unreliable", fit.covariance_unreliable},
                      {"boundary", fit.boundary},
                      {"stalled_msteps", fit.stalled_msteps}};
  j["warnings"] = all_warnings(sel, eff);
  j["exit_code"] = fit_exit_code(sel);
  return j;
}

std::string fit_report_table(const FitContext& ctx, const Selection& sel,
                             const EffectEstimates& eff) {
  const FitResult& fit = sel.chosen_fit();
  std::ostringstream os;
  os << "input: " << ctx.input_path << "  (n = " << ctx.n_obs << ", zeros = " << ctx.n_zero
     << ")\n";
  os << "seed: " << ctx.seed << "  B: " << fmt(ctx.cap) << "  family: " << ctx.family_request
     << "\n\n";

  os << "model selection (AIC)\n";
  os << "  " << pad("family", 8) << pad("status", 10) << pad("loglik", 14) << pad("k", 4)
     << pad("AIC", 14) << "note\n";
  for (const auto& c : sel.candidates) {
    os << "  " << pad(std::string(to_string(c.family)), 8) << pad(status_of(c, sel.chosen), 10);
    if (c.fit) {
      os << pad(fmt(c.fit->loglik), 14) << pad(std::to_string(c.fit->n_params), 4)
         << pad(fmt(c.fit->aic), 14);
    } else {
      os << pad("-", 14) << pad("-", 4) << pad("-", 14);
    }
    os << c.note << "\n";
  }
  os << "\nchosen family: " << to_string(sel.chosen) << "\n\n";

  os << "parameters\n";
  const auto names = fit.theta_hat.names();
  const Eigen::VectorXd nat = fit.theta_hat.natural();
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    os << "  " << pad(names[k], 10) << pad(fmt(nat[i]), 14)
       << "(se " << fmt(fit.std_errors.size() > i ? fit.std_errors[i] : NAN) << ")\n";
  }

  os << "\neffects, x: " << fmt(eff.x1) << " -> " << fmt(eff.x2) << ", CDE at m = "
     << fmt(eff.cde_m) << ", " << fmt(100.0 * eff.ci_level) << "% CI\n";
  os << "  " << pad("effect", 8) << pad("estimate", 14) << pad("se", 14) << pad("lower", 14)
     << pad("upper", 14) << "p\n";
  for (Effect e : kAllEffects) {
    const EffectEstimate& v = eff[e];
    os << "  " << pad(std::string(to_string(e)), 8) << pad(fmt(v.estimate), 14) << pad(fmt(v.se), 14)
       << pad(fmt(v.lower), 14) << pad(fmt(v.upper), 14) << fmt(v.p_value) << "\n";
  }

  os << "\nconverged: " << (fit.converged ? "yes" : "no") << " after " << fit.n_iters
     << " EM iterations, loglik " << fmt(fit.loglik) << "\n";
  if (fit.covariance_unreliable) os << "covariance flagged unreliable\n";
  for (const auto& w : all_warnings(sel, eff)) os << "warning: " << w << "\n";
  return os.str();
}

namespace {

constexpr std::array<const char*, 3> kStudiedNames = {"NIE1", "NIE2", "NIE"};

}  // namespace

Json study_report_json(const Scenario& s, const StudySummary& sum) {
  Json j;
  j["report"] = "simulate";
  j["schema_version"] = kReportSchemaVersion;
  j["seed"] = sum.seed;
  const Theta& t = s.theta_true;
  Json truth;
  const auto names = t.names();
  const Eigen::VectorXd nat = t.natural();
  for (std::size_t k = 0; k < names.size(); ++k) truth[names[k]] = nat[static_cast<Eigen::Index>(k)];
  j["scenario"] = {{"name", sum.scenario},
                   {"family", std::string(to_string(s.family))},
                   {"n", s.n},
                   {"n_reps", s.n_reps},
                   {"x_source", s.x_source.describe()},
                   {"x1", sum.x1},
                   {"x2", sum.x2},
                   {"B", s.cap},
                   {"theta", truth}};
  j["replicates"] = {{"requested", sum.n_reps}, {"ok", sum.n_ok}, {"excluded", sum.n_excluded}};
  j["zero_fraction"] = {{"total", sum.mean_zero_fraction}, {"false", sum.mean_false_zero_fraction}};
  Json sel;
  for (MediatorFamily f : {MediatorFamily::zip, MediatorFamily::zinb, MediatorFamily::zilon}) {
    const auto it = sum.selected.find(std::string(to_string(f)));
    sel[std::string(to_string(f))] = it == sum.selected.end() ? 0 : it->second;
  }
  j["selected"] = sel;
  Json eff = Json::array();
  for (std::size_t k = 0; k < 3; ++k) {
    const EffectSummary& e = sum.effects[k];
    eff.push_back({{"effect", kStudiedNames[k]},
                   {"true", e.true_value},
                   {"mean_estimate", e.mean_estimate},
                   {"bias", e.bias},
                   {"percent_bias", e.percent_bias},
                   {"coverage", e.coverage},
                   {"mean_se", e.mean_se},
                   {"empirical_sd", e.empirical_sd}});
  }
  j["effects"] = eff;
  Json errors = Json::array();
  for (const auto& r : sum.replicates) {
    if (!r.ok) errors.push_back({{"rep", r.rep}, {"error", r.error}});
  }
  j["errors"] = errors;
  return j;
}

std::string study_report_table(const Scenario& s, const StudySummary& sum) {
  std::ostringstream os;
  os << "scenario: " << sum.scenario << "  family: " << to_string(s.family) << "  n: " << s.n
     << "  replicates: " << sum.n_ok << "/" << sum.n_reps << "  seed: " << sum.seed << "\n";
  os << "x: " << fmt(sum.x1) << " -> " << fmt(sum.x2) << "  zeros: "
     << fmt(100.0 * sum.mean_zero_fraction) << "% (false " << fmt(100.0 * sum.mean_false_zero_fraction)
     << "%)\n";
  os << "selected:";
  for (const auto& [k, v] : sum.selected) os << " " << k << "=" << v;
  os << "\n\n";
  os << "  " << pad("effect", 8) << pad("true", 13) << pad("mean", 13) << pad("bias", 13)
     << pad("%bias", 10) << pad("CP", 8) << pad("mean se", 13) << "emp sd\n";
  for (std::size_t k = 0; k < 3; ++k) {
    const EffectSummary& e = sum.effects[k];
    os << "  " << pad(kStudiedNames[k], 8) << pad(fmt(e.true_value), 13) << pad(fmt(e.mean_estimate), 13)
       << pad(fmt(e.bias), 13) << pad(fmt(e.percent_bias), 10) << pad(fmt(e.coverage), 8)
       << pad(fmt(e.mean_se), 13) << fmt(e.empirical_sd) << "\n";
  }
  return os.str();
}

std::string study_report_csv(const StudySummary& sum) {
  std::ostringstream os;
  os << "scenario,effect,true,mean_estimate,bias,percent_bias,coverage,mean_se,empirical_sd,n_ok\n";
  for (std::size_t k = 0; k < 3; ++k) {
    const EffectSummary& e = sum.effects[k];
    os << sum.scenario << ',' << kStudiedNames[k] << ',' << fmt(e.true_value) << ','
       << fmt(e.mean_estimate) << ',' << fmt(e.bias) << ',' << fmt(e.percent_bias) << ','
       << fmt(e.coverage) << ',' << fmt(e.mean_se) << ',' << fmt(e.empirical_sd) << ','
       << sum.n_ok << '\n';
  }
  return os.str();
}

Json error_json(const std::string& kind, const std::string& message, int exit_code) {
  Json j;
  j["report"] = "error";
  j["schema_version"] = kReportSchemaVersion;
  j["error"] = {{"kind", kind}, {"message", message}};
  j["exit_code"] = exit_code;
  return j;
}

}  // namespace zimed
