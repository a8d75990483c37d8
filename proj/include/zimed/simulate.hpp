#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zimed/data.hpp"
#include "zimed/effects.hpp"
#include "zimed/estimator.hpp"
#include "zimed/selection.hpp"
#include "zimed/theta.hpp"

namespace zimed {

struct XSource {
  enum class Kind { standard_normal, uniform, file };
  Kind kind = Kind::standard_normal;
  double a = 0.0;  // uniform bounds
  double b = 1.0;
  std::string path;
  std::vector<double> values;  // loaded from `path`; x is resampled from them

  static XSource parse(const std::string& spec);
  std::string describe() const;
  double draw(Rng& rng) const;
};

struct Scenario {
  std::string name;
  MediatorFamily family = MediatorFamily::zilon;
  Theta theta_true;  // beta5 = 0 in the shipped presets
  double cap = 20.0;
  std::size_t n = 1000;
  int n_reps = 100;
  XSource x_source;
  std::string target_zero_fraction;
  double x1 = 0.0;
  double x2 = 1.0;
  std::uint64_t seed = 1;
  std::vector<MediatorFamily> fit_families;  // empty: AIC over eligible families

  void validate() const;
};

// Calibrated scenarios: "<family>-<zeros>" for family in {zilon, zinb, zip}
// and zeros in {30, 50, 60, 70, 76}.
std::vector<std::string> preset_names();
Scenario preset(const std::string& name);

// key = value text, one per line, '#' starts a comment. A `preset` key loads
// that preset first; later keys override it.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path_or_preset);

struct ZeroComposition {
  double total = 0.0;       // P(M* = 0)
  double true_zero = 0.0;   // P(M = 0)
  double false_zero = 0.0;  // P(M > 0, M* = 0)
};

// Expected zero composition under the scenario's x distribution (numerical
// integration over x, exact sums/quadrature over m).
ZeroComposition expected_zero_composition(const Scenario& s);

// Tunes gamma0 to reach `total` zeros and eta (adjusted last, outer loop) so
// that `false_share` of them are false. Returns the adjusted scenario.
Scenario calibrate(Scenario s, double total, double false_share);

struct SimulatedData {
  Dataset data;
  std::vector<double> true_m;
  double zero_fraction = 0.0;
  double false_zero_fraction = 0.0;  // among all records
};

SimulatedData generate_dataset(const Scenario& s, int rep_index);

// Rng stream for replicate `rep_index` of a run seeded with `seed`.
Rng replicate_rng(std::uint64_t seed, int rep_index);

struct ReplicateResult {
  int rep = 0;
  bool ok = false;
  std::string error;
  MediatorFamily chosen = MediatorFamily::zilon;
  std::array<EffectEstimate, 5> effects{};
  std::array<bool, 5> covered{};
  double zero_fraction = 0.0;
  double false_zero_fraction = 0.0;
  // Largest observed log-likelihood decrease over all EM traces of the
  // replicate (every family fitted); <= 0 means monotone.
  double max_trace_drop = 0.0;
  int n_fits = 0;
  bool all_converged = true;
};

struct EffectSummary {
  double true_value = 0.0;
  double mean_estimate = 0.0;
  double mean_se = 0.0;
  double bias = 0.0;
  double percent_bias = 0.0;
  double coverage = 0.0;     // percent
  double empirical_sd = 0.0;  // SD of the estimates across replicates
};

struct StudySummary {
  std::string scenario;
  MediatorFamily family = MediatorFamily::zilon;
  int n_reps = 0;
  int n_ok = 0;
  int n_excluded = 0;
  double x1 = 0.0;
  double x2 = 0.0;
  std::uint64_t seed = 0;
  double mean_zero_fraction = 0.0;
  double mean_false_zero_fraction = 0.0;
  std::array<EffectSummary, 3> effects{};  // NIE1, NIE2, NIE
  std::map<std::string, int> selected;     // family name -> count
  std::vector<ReplicateResult> replicates;
};

struct StudyOptions {
  FitConfig fit;
  double ci_level = 0.95;
  std::function<void(const ReplicateResult&)> on_replicate;
};

ReplicateResult run_replicate(const Scenario& s, int rep, const StudyOptions& options);
StudySummary summarize(const Scenario& s, std::vector<ReplicateResult> reps);
StudySummary run_study(const Scenario& s, const StudyOptions& options = {});

}  // namespace zimed
