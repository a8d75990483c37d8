#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zimed/effects.hpp"
#include "zimed/error.hpp"
#include "zimed/io.hpp"
#include "zimed/report.hpp"
#include "zimed/selection.hpp"
#include "zimed/simulate.hpp"

using namespace zimed;

namespace {

enum ExitCode : int {
  kOk = 0,
  kNotTrustworthy = 1,  // fit finished but did not converge or covariance is flagged
  kUsage = 2,           // bad flags or a missing column
  kIngestion = 3,
  kEstimation = 4,
  kNumerical = 5,
  kInternal = 6,
};

struct Common {
  std::string output = "table";
  unsigned long long seed = 0;
  double cap = kDefaultCap;
  double ci_level = 0.95;
  double eta_init = 1.0;
};

int fail(const Common& c, const std::string& kind, const std::string& msg, int code) {
  std::cerr << "zimed: " << msg << "\n";
  if (c.output != "table") std::cout << error_json(kind, msg, code).dump(2) << "\n";
  return code;
}

template <class Body>
int guarded(const Common& c, Body&& body) {
  try {
    return body();
  } catch (const MissingColumnError& e) {
    return fail(c, "missing_column", e.what(), kUsage);
  } catch (const IngestionError& e) {
    return fail(c, "ingestion", e.what(), kIngestion);
  } catch (const EstimationError& e) {
    return fail(c, "estimation", e.what(), kEstimation);
  } catch (const NumericalError& e) {
    return fail(c, "numerical", e.what(), kNumerical);
  } catch (const DomainError& e) {
    return fail(c, "invalid_argument", e.what(), kUsage);
  } catch (const std::exception& e) {
    return fail(c, "internal", e.what(), kInternal);
  }
}

void emit(const Common& c, const std::string& table, const Json& json) {
  if (c.output == "table" || c.output == "both") std::cout << table;
  if (c.output == "both") std::cout << "\n";
  if (c.output == "json" || c.output == "both") std::cout << json.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zimed: causal mediation with zero-inflated mediators"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--output", common.output, "json, table or both")
        ->check(CLI::IsMember({"json", "table", "both"}));
    sub->add_option("--seed", common.seed, "random seed, echoed in every report");
    sub->add_option("--B", common.cap, "false-zero detection cap")->check(CLI::PositiveNumber);
    sub->add_option("--ci-level", common.ci_level, "confidence level")->check(CLI::Range(0.5, 0.9999));
    sub->add_option("--eta-init", common.eta_init, "starting eta for EM")->check(CLI::PositiveNumber);
  };

  // fit
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit the mediation model to a CSV dataset");
  std::string input;
  ColumnMap cols;
  std::string family = "auto";
  double x1 = 0.0;
  double x2 = 1.0;
  std::optional<double> cde_m;
  fit_cmd->add_option("--input", input, "CSV file with a header row")->required();
  fit_cmd->add_option("--y", cols.y, "outcome column")->capture_default_str();
  fit_cmd->add_option("--m", cols.m, "mediator column")->capture_default_str();
  fit_cmd->add_option("--x", cols.x, "exposure column")->capture_default_str();
  fit_cmd->add_option("--z", cols.z, "confounder column (repeatable)")->take_all();
  fit_cmd->add_option("--family", family, "auto, zilon, zinb or zip")
      ->transform(CLI::IsMember({"auto", "zilon", "zinb", "zip"}, CLI::ignore_case));
  fit_cmd->add_option("--x1", x1, "reference exposure level")->capture_default_str();
  fit_cmd->add_option("--x2", x2, "contrast exposure level")->capture_default_str();
  fit_cmd->add_option("--cde-m", cde_m, "mediator level for the CDE (default: median positive m)");
  add_common(fit_cmd);

  // simulate
  CLI::App* sim_cmd = app.add_subcommand("simulate", "run a Monte Carlo study");
  std::string scenario_name;
  std::optional<int> reps;
  std::optional<std::size_t> n;
  std::string csv_out;
  std::string data_out;
  bool list = false;
  sim_cmd->add_option("--scenario", scenario_name, "preset name or key = value scenario file");
  sim_cmd->add_option("--reps", reps, "override the number of replicates");
  sim_cmd->add_option("--n", n, "override the sample size");
  sim_cmd->add_option("--csv", csv_out, "also write the summary as CSV to this path");
  sim_cmd->add_option("--write-data", data_out,
                      "write replicate 0's dataset to this CSV path instead of running the study");
  sim_cmd->add_flag("--list", list, "list the built-in scenario presets");
  add_common(sim_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (fit_cmd->parsed()) {
    return guarded(common, [&] {
      const Dataset data = ingest_csv(input, cols);
      FitConfig cfg;
      cfg.cap = common.cap;
      cfg.seed = common.seed;
      cfg.eta_init = common.eta_init;
      std::vector<MediatorFamily> families;
      if (family != "auto") {
        const MediatorFamily f = parse_family(family);
        if (is_count_family(f) && !data.integer_mediator()) {
          throw EstimationError(std::string(to_string(f)) + " requires integer mediator values");
        }
        families.push_back(f);
      }
      const Selection sel = select_model(data, cfg, families);

      EffectRequest req;
      req.x1 = x1;
      req.x2 = x2;
      req.cde_m = cde_m;
      req.ci_level = common.ci_level;
      const EffectEstimates eff = effects_with_inference(sel.chosen_fit(), req);

      FitContext ctx;
      ctx.input_path = input;
      ctx.columns = cols;
      ctx.family_request = family;
      ctx.seed = common.seed;
      ctx.cap = common.cap;
      ctx.eta_init = common.eta_init;
      ctx.request = req;
      ctx.n_obs = data.size();
      ctx.n_zero = data.n_zero();
      ctx.integer_mediator = data.integer_mediator();
      emit(common, fit_report_table(ctx, sel, eff), fit_report_json(ctx, sel, eff));
      return fit_exit_code(sel);
    });
  }

  return guarded(common, [&] {
    if (list) {
      for (const auto& p : preset_names()) std::cout << p << "\n";
      return static_cast<int>(kOk);
    }
    if (scenario_name.empty()) throw DomainError("--scenario is required");
    Scenario s = load_scenario(scenario_name);
    if (sim_cmd->count("--seed")) s.seed = common.seed;
    if (sim_cmd->count("--B")) s.cap = common.cap;
    if (reps) s.n_reps = *reps;
    if (n) s.n = *n;
    s.validate();
    if (!data_out.empty()) {
      const SimulatedData sim = generate_dataset(s, 0);
      write_csv(sim.data, data_out);
      std::cerr << "wrote " << sim.data.size() << " rows (seed " << s.seed << ") to " << data_out
                << "\n";
      return static_cast<int>(kOk);
    }
    StudyOptions opt;
    opt.ci_level = common.ci_level;
    opt.fit.eta_init = common.eta_init;
    const StudySummary sum = run_study(s, opt);
    emit(common, study_report_table(s, sum), study_report_json(s, sum));
    if (!csv_out.empty()) {
      std::ofstream out(csv_out);
      if (!out) throw IngestionError("cannot write '" + csv_out + "'");
      out << study_report_csv(sum);
    }
    return static_cast<int>(sum.n_ok == sum.n_reps ? kOk : kNotTrustworthy);
  });
}
