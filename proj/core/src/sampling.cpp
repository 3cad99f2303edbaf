#include "vrts/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vrts/error.hpp"

namespace vrts {

std::vector<double> nucleus_log_probs(std::span<const double> logits, double temperature,
                                      double top_p) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (!(top_p > 0.0) || top_p > 1.0) throw InvalidArgument("top_p must lie in (0, 1]");
  const std::size_t n = logits.size();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  std::vector<double> scaled(n);
  double max_logit = kNegInf;
  for (std::size_t j = 0; j < n; ++j) {
    scaled[j] = logits[j] / temperature;
    max_logit = std::max(max_logit, scaled[j]);
  }
  double z = 0.0;
  for (const double s : scaled) z += std::exp(s - max_logit);
  const double log_z = max_logit + std::log(z);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scaled[a] > scaled[b]; });

  std::vector<bool> keep(n, false);
  double mass = 0.0;
  for (const std::size_t j : order) {
    keep[j] = true;
    mass += std::exp(scaled[j] - log_z);
    if (mass >= top_p) break;
  }

  double kept_max = kNegInf;
  for (std::size_t j = 0; j < n; ++j) {
    if (keep[j]) kept_max = std::max(kept_max, scaled[j]);
  }
  double kept_z = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (keep[j]) kept_z += std::exp(scaled[j] - kept_max);
  }
  const double log_kept_z = kept_max + std::log(kept_z);

  std::vector<double> out(n, kNegInf);
  for (std::size_t j = 0; j < n; ++j) {
    if (keep[j]) out[j] = scaled[j] - log_kept_z;
  }
  return out;
}

int sample_index(std::span<const double> log_probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  double cumulative = 0.0;
  int last = -1;
  for (std::size_t j = 0; j < log_probs.size(); ++j) {
    if (std::isinf(log_probs[j])) continue;
    cumulative += std::exp(log_probs[j]);
    last = static_cast<int>(j);
    if (u < cumulative) return last;
  }
  return last;
}

}  // namespace vrts
