#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cdlab::tools {

inline constexpr std::uint64_t kDefaultBatterySeed = 20240617;
inline constexpr int kBatteryCriteria = 9;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;   // deterministic summary of the measured values
  std::string threshold;  // what `measured` is compared against
  double seconds = 0.0;
  double budget_seconds = 0.0;

  bool within_budget() const { return seconds < budget_seconds; }
};

// Criterion `id` in 1..kBatteryCriteria. Exceptions inside a check count as a
// failure with the message in `measured`.
CriterionResult run_criterion(int id, std::uint64_t seed = kDefaultBatterySeed);

std::vector<CriterionResult> run_battery(std::uint64_t seed = kDefaultBatterySeed);

}  // namespace cdlab::tools
