#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zimed/estimator.hpp"

namespace zimed {

struct FamilyOutcome {
  MediatorFamily family;
  std::optional<FitResult> fit;  // empty when skipped or failed
  std::string note;              // reason for skipping / error message
  double aic() const;            // +inf when there is no fit
};

struct Selection {
  MediatorFamily chosen;
  std::vector<FamilyOutcome> candidates;  // fixed order ZIP, ZINB, ZILoN

  const FitResult& chosen_fit() const;
};

// Families that may be fitted to `data`: all three for integer mediators,
// ZILoN only otherwise.
std::vector<MediatorFamily> eligible_families(const Dataset& data);

// Fits each requested family (default: every eligible one) and picks the
// smallest AIC. Ties go to the family with fewer parameters, then to the
// order ZIP < ZINB < ZILoN. Throws EstimationError if no family could be fitted.
// The AIC winner among converged fits, with the tie-breaking above.
MediatorFamily pick_family(const std::vector<FamilyOutcome>& candidates);

Selection select_model(const Dataset& data, const FitConfig& config,
                       std::vector<MediatorFamily> families = {});

}  // namespace zimed
