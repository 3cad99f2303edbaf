#include "vrts/inference.hpp"

namespace vrts {

std::string PolicyInference::generate(const McqaSample& sample, std::span<const int> frames,
                                      const SamplingParams& params, std::uint64_t seed) const {
  PolicyContext context{&sample, std::vector<int>(frames.begin(), frames.end())};
  return policy_.sample(context, params, seed).text;
}

}  // namespace vrts
