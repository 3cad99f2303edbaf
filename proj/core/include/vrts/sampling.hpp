#pragma once

#include <random>
#include <span>
#include <vector>

namespace vrts {

// Log-probabilities after temperature scaling and nucleus truncation: the
// smallest prefix (by descending probability, ties by index) whose mass
// reaches top_p is renormalized; everything else gets -inf.
std::vector<double> nucleus_log_probs(std::span<const double> logits, double temperature,
                                      double top_p);

// Draws an index from log-probabilities (entries at -inf are never chosen).
int sample_index(std::span<const double> log_probs, std::mt19937_64& rng);

}  // namespace vrts
