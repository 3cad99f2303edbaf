#include "vrts/rewards.hpp"

#include <cmath>

#include "vrts/error.hpp"

namespace vrts {

void validate(const RewardWeights& weights) {
  std::vector<std::string> issues;
  if (!(weights.w_format >= 0.0) || !std::isfinite(weights.w_format)) {
    issues.push_back("rewards.w_format must be a finite nonnegative number");
  }
  if (!(weights.w_acc >= 0.0) || !std::isfinite(weights.w_acc)) {
    issues.push_back("rewards.w_acc must be a finite nonnegative number");
  }
  if (issues.empty() && weights.w_format + weights.w_acc <= 0.0) {
    issues.push_back("rewards.w_format + rewards.w_acc must be positive");
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

double format_reward(const ParsedResponse& parsed) {
  return parsed.well_formed_format ? 1.0 : 0.0;
}

double accuracy_reward(const ParsedResponse& parsed, Letter gt) {
  return parsed.answer.has_value() && *parsed.answer == gt ? 1.0 : 0.0;
}

double total_reward(const ParsedResponse& parsed, Letter gt, const RewardWeights& weights) {
  const double format = format_reward(parsed);
  double accuracy = accuracy_reward(parsed, gt);
  if (weights.gate_accuracy_on_format && format == 0.0) accuracy = 0.0;
  return weights.w_format * format + weights.w_acc * accuracy;
}

}  // namespace vrts
