#include "zimed/selection.hpp"

#include <algorithm>
#include <limits>

#include "zimed/error.hpp"

namespace zimed {

namespace {

constexpr MediatorFamily kOrder[] = {MediatorFamily::zip, MediatorFamily::zinb,
                                     MediatorFamily::zilon};

int order_rank(MediatorFamily f) {
  for (int i = 0; i < 3; ++i) {
    if (kOrder[i] == f) return i;
  }
  return 3;
}

}  // namespace

double FamilyOutcome::aic() const {
  return fit ? fit->aic : std::numeric_limits<double>::infinity();
}

const FitResult& Selection::chosen_fit() const {
  for (const auto& c : candidates) {
    if (c.family == chosen && c.fit) return *c.fit;
  }
  throw EstimationError("selected family has no fit");
}

std::vector<MediatorFamily> eligible_families(const Dataset& data) {
  if (data.integer_mediator()) {
    return {MediatorFamily::zip, MediatorFamily::zinb, MediatorFamily::zilon};
  }
  return {MediatorFamily::zilon};
}

MediatorFamily pick_family(const std::vector<FamilyOutcome>& candidates) {
  const FamilyOutcome* best = nullptr;
  for (const auto& c : candidates) {
    if (!c.fit || !c.fit->converged) continue;
    if (!best) {
      best = &c;
      continue;
    }
    const double a = c.aic();
    const double b = best->aic();
    const bool earlier = order_rank(c.family) < order_rank(best->family);
    if (a < b || (a == b && (c.fit->n_params < best->fit->n_params ||
                             (c.fit->n_params == best->fit->n_params && earlier)))) {
      best = &c;
    }
  }
  if (!best) {
    std::string why;
    for (const auto& c : candidates) {
      why += std::string(to_string(c.family)) + ": " + c.note + "; ";
    }
    throw EstimationError("model selection failed for every family (" + why + ")");
  }
  return best->family;
}

Selection select_model(const Dataset& data, const FitConfig& config,
                       std::vector<MediatorFamily> families) {
  const std::vector<MediatorFamily> eligible = eligible_families(data);
  const bool explicit_request = !families.empty();
  if (!explicit_request) families = eligible;
  std::sort(families.begin(), families.end(),
            [](MediatorFamily a, MediatorFamily b) { return order_rank(a) < order_rank(b); });
  families.erase(std::unique(families.begin(), families.end()), families.end());

  Selection sel{};
  for (MediatorFamily fam : families) {
    FamilyOutcome outcome{fam, std::nullopt, {}};
    if (std::find(eligible.begin(), eligible.end(), fam) == eligible.end()) {
      outcome.note = "skipped: mediator values are not integers";
      sel.candidates.push_back(std::move(outcome));
      continue;
    }
    FitConfig cfg = config;
    if (cfg.init && cfg.init->family != fam) cfg.init.reset();
    try {
      outcome.fit = fit(data, fam, cfg);
      if (!outcome.fit->converged) outcome.note = "excluded: EM did not converge";
    } catch (const Error& e) {
      outcome.note = std::string("failed: ") + e.what();
    }
    sel.candidates.push_back(std::move(outcome));
  }

  sel.chosen = pick_family(sel.candidates);
  return sel;
}

}  // namespace zimed
