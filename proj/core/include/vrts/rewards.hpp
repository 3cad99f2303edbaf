#pragma once

#include "vrts/types.hpp"

namespace vrts {

struct RewardWeights {
  double w_format = 1.0;
  double w_acc = 1.0;
  // Ablation switch: when set, the accuracy component requires a well-formed
  // response. Off by default (plain sum).
  bool gate_accuracy_on_format = false;
};

void validate(const RewardWeights& weights);

double format_reward(const ParsedResponse& parsed);
double accuracy_reward(const ParsedResponse& parsed, Letter gt);
double total_reward(const ParsedResponse& parsed, Letter gt, const RewardWeights& weights = {});

}  // namespace vrts
