#pragma once

#include "runner.hpp"

#include <functional>

namespace symcap {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<ReportRecord> records;  // one per sub-check, PASS/FAIL or informational
};

struct AcceptanceOptions {
  std::uint64_t seed = 7;
  int workers = 1;
};

inline constexpr int kAcceptanceCriteria = 13;

// Criterion id in 1..13 at the default desk budgets.
CriterionResult acceptance_check(int id, const AcceptanceOptions& opt);
std::vector<CriterionResult> acceptance_checks(const AcceptanceOptions& opt,
                                               const std::function<void(const CriterionResult&)>& progress = {});

}  // namespace symcap
