#pragma once

#include "hoslab/report.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hoslab {

enum class Tier { smoke, reference, extended };

std::string to_string(Tier t);
Tier tier_from_string(const std::string& name);

struct AcceptanceOptions
{
  Tier tier = Tier::reference;
  std::uint64_t seed = 1;
  int workers = 1;
  std::vector<int> only;  // criterion ids to run; empty runs all 13
};

struct CriterionOutcome
{
  int id = 0;
  std::string title;
  bool pass = false;
  std::string summary;
  double seconds = 0.0;
  Report report{"acceptance"};
};

inline constexpr int kCriterionCount = 13;

/// Runs the acceptance criteria in order. Tolerances are fixed; the tier only
/// scales sample counts and sweep lengths. A criterion whose computation
/// throws is reported as failed with the error text. `progress` is called
/// after each criterion.
std::vector<CriterionOutcome> run_acceptance(const AcceptanceOptions& opts,
                                             const std::function<void(const CriterionOutcome&)>& progress = {});

/// "PASS  [ 6] title (12.3 s): summary"
std::string format_outcome(const CriterionOutcome& o);

}  // namespace hoslab
