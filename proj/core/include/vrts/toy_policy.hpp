#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrts/policy.hpp"

namespace vrts {

struct ToyPolicyShape {
  int n_options = 4;
  int think_length = 8;
  // Features are evidence counts per observed frame, times this scale.
  double feature_scale = 32.0;

  bool operator==(const ToyPolicyShape&) const = default;
};

// Linear-softmax policy over evidence features.
//
// Output: "<think>" w1 .. wL "</think><answer>" X "</answer>". The L think
// words come from a small head (one "blank" word plus one cue word per
// option); X is drawn from the option head. Both heads read the same feature
// vector: per-option evidence counts among the observed frames divided by
// the number of frames observed, plus a bias. Only sampled tokens (think
// words and the letter) appear in Generation::tokens; tags are scaffolding.
class ToyPolicy final : public TrainablePolicy {
 public:
  ToyPolicy(ToyPolicyShape shape, std::vector<double> parameters);

  static ToyPolicy zeros(ToyPolicyShape shape);
  static ToyPolicy random(ToyPolicyShape shape, std::uint64_t seed, double stddev = 0.01);

  static std::size_t parameter_count(const ToyPolicyShape& shape);

  Generation sample(const PolicyContext& context, const SamplingParams& params,
                    std::uint64_t seed) const override;
  std::vector<double> logprobs(const PolicyContext& context, std::span<const int> tokens,
                               const SamplingParams& params) const override;
  std::unique_ptr<Policy> snapshot() const override;

  std::span<const double> parameters() const override { return params_; }
  void set_parameters(std::span<const double> values) override;
  void accumulate_logprob_gradient(const PolicyContext& context, std::span<const int> tokens,
                                   const SamplingParams& params,
                                   std::span<const double> token_weights,
                                   std::span<double> grad) const override;

  const ToyPolicyShape& shape() const { return shape_; }
  int think_vocab() const { return shape_.n_options + 1; }
  int feature_dim() const { return shape_.n_options + 1; }
  // Token id of option letter `index` in Generation::tokens.
  int letter_token(int index) const { return think_vocab() + index; }

  std::vector<double> features(const PolicyContext& context) const;
  std::vector<double> option_logits(const PolicyContext& context) const;
  std::vector<double> think_logits(const PolicyContext& context) const;

  std::string think_word(int token) const;

 private:
  ToyPolicyShape shape_;
  std::vector<double> params_;  // option head (K x D) then think head (V x D)
};

// Checkpoint blob: {"format","version","shape","parameters","config"}.
std::string toy_checkpoint_json(const ToyPolicy& policy, std::string_view config_json = "{}");
ToyPolicy parse_toy_checkpoint(std::string_view text);

}  // namespace vrts
