#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace padec {

using ojson = nlohmann::ordered_json;

// One verified claim. max_violation is the largest observed excess over the
// claimed bound (0 when the claim holds exactly).
struct ClaimReport {
  std::string claim;
  std::string anchor;
  ojson config = ojson::object();
  std::int64_t trials = 0;
  double max_violation = 0;
  double empirical_constant = 0;
  std::string witness_ref;
  bool passed = false;
  ojson details = ojson::object();

  ojson to_json() const {
    ojson j;
    j["claim"] = claim;
    j["anchor"] = anchor;
    j["config"] = config;
    j["trials"] = trials;
    j["max_violation"] = max_violation;
    j["empirical_constant"] = empirical_constant;
    j["witness_ref"] = witness_ref;
    j["passed"] = passed;
    if (!details.empty()) j["details"] = details;
    return j;
  }
};

inline bool all_passed(const std::vector<ClaimReport>& rs) {
  for (auto& r : rs)
    if (!r.passed) return false;
  return true;
}

}  // namespace padec
