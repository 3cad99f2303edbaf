#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vrts/types.hpp"

namespace vrts {

// What the policy conditions on: the question and the frames it may look at.
struct PolicyContext {
  const McqaSample* sample = nullptr;
  std::vector<int> frames;
};

// A sampled output. `logp` holds the per-token log-probability of `tokens`
// under the distribution the tokens were actually drawn from.
struct Generation {
  std::string text;
  std::vector<int> tokens;
  std::vector<double> logp;
};

class Policy {
 public:
  virtual ~Policy() = default;

  virtual Generation sample(const PolicyContext& context, const SamplingParams& params,
                            std::uint64_t seed) const = 0;

  // Re-scores `tokens`. For the policy that produced a Generation this
  // reproduces its recorded `logp` exactly.
  virtual std::vector<double> logprobs(const PolicyContext& context, std::span<const int> tokens,
                                       const SamplingParams& params) const = 0;

  // Frozen copy, usable as the sampling or the reference policy.
  virtual std::unique_ptr<Policy> snapshot() const = 0;
};

class TrainablePolicy : public Policy {
 public:
  virtual std::span<const double> parameters() const = 0;
  virtual void set_parameters(std::span<const double> values) = 0;

  // grad += sum_t token_weights[t] * d logp_t / d theta
  virtual void accumulate_logprob_gradient(const PolicyContext& context,
                                           std::span<const int> tokens,
                                           const SamplingParams& params,
                                           std::span<const double> token_weights,
                                           std::span<double> grad) const = 0;
};

}  // namespace vrts
