#pragma once

#include <string>

#include <json.hpp>

#include "zimed/effects.hpp"
#include "zimed/io.hpp"
#include "zimed/selection.hpp"
#include "zimed/simulate.hpp"

namespace zimed {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

// Everything the fit report states about how it was produced.
struct FitContext {
  std::string input_path;
  ColumnMap columns;
  std::string family_request = "auto";
  unsigned long long seed = 0;
  double cap = 20.0;
  double eta_init = 1.0;
  EffectRequest request;
  std::size_t n_obs = 0;
  std::size_t n_zero = 0;
  bool integer_mediator = true;
};

// Exit code of a completed fit: 0 iff converged with a trustworthy covariance.
int fit_exit_code(const Selection& sel);

Json fit_report_json(const FitContext& ctx, const Selection& sel, const EffectEstimates& eff);
std::string fit_report_table(const FitContext& ctx, const Selection& sel,
                             const EffectEstimates& eff);

Json study_report_json(const Scenario& s, const StudySummary& sum);
std::string study_report_table(const Scenario& s, const StudySummary& sum);
// One row per effect (NIE1, NIE2, NIE).
std::string study_report_csv(const StudySummary& sum);

Json error_json(const std::string& kind, const std::string& message, int exit_code);

}  // namespace zimed
