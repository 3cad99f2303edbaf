#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "vrts/policy.hpp"
#include "vrts/types.hpp"

namespace vrts {

// Anything that answers a question given a frame subset: the toy policy, a
// remote chat endpoint, or a scripted mock. Implementations must be safe to
// call concurrently. Transport problems surface as TransportError.
class InferenceInterface {
 public:
  virtual ~InferenceInterface() = default;

  virtual std::string generate(const McqaSample& sample, std::span<const int> frames,
                               const SamplingParams& params, std::uint64_t seed) const = 0;
};

// Adapts a Policy. The policy is borrowed and must outlive the adapter.
class PolicyInference final : public InferenceInterface {
 public:
  explicit PolicyInference(const Policy& policy) : policy_(policy) {}

  std::string generate(const McqaSample& sample, std::span<const int> frames,
                       const SamplingParams& params, std::uint64_t seed) const override;

 private:
  const Policy& policy_;
};

}  // namespace vrts
