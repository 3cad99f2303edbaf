#pragma once

// Finite-difference check of the GRPO objective gradient through the toy
// policy, shared by the unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "test_util.hpp"
#include "vrts/frames.hpp"
#include "vrts/grpo.hpp"
#include "vrts/toy_policy.hpp"

namespace vrts::testing {

struct GradCheckResult {
  double relative_error = 0.0;
  double max_abs_error = 0.0;
  double clip_fraction = 0.0;
  double mean_kl = 0.0;
};

struct GradCheckCase {
  // Shared so that copies keep `context.sample` valid.
  std::shared_ptr<McqaSample> sample;
  PolicyContext context;
  SamplingParams params;
  GrpoConfig config;
  ToyPolicy policy = ToyPolicy::zeros({});
  RolloutGroup group;
};

inline std::vector<double> perturbed(std::span<const double> base, double scale,
                                     std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, scale);
  std::vector<double> out(base.begin(), base.end());
  for (double& x : out) x += noise(rng);
  return out;
}

// Builds a random instance. Old and reference policies are perturbed copies,
// so ratios spread across and beyond the clip band and the KL term is active.
inline GradCheckCase make_grad_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GradCheckCase c;
  const int n_options = 2 + static_cast<int>(rng() % 5);
  ToyPolicyShape shape{n_options, 1 + static_cast<int>(rng() % 8), 0.5 + 8.0 * unit(rng)};
  c.sample = std::make_shared<McqaSample>(
      make_sample("g" + std::to_string(seed), n_options, letter_at(0), 64));
  auto& video = std::get<SyntheticVideo>(c.sample->video);
  for (Letter& label : video.frame_evidence) {
    if (unit(rng) < 0.4) label = letter_at(static_cast<int>(rng() % n_options));
  }
  c.context = PolicyContext{c.sample.get(), frame_indices(64, 8 + static_cast<int>(rng() % 56))};

  const bool nucleus = unit(rng) < 0.25;
  c.params.temperature = 0.5 + unit(rng);
  c.params.top_p = nucleus ? 0.95 + 0.05 * unit(rng) : 1.0;
  c.config.clip_epsilon = 0.05 + 0.3 * unit(rng);
  c.config.kl_beta = unit(rng) < 0.2 ? 0.0 : 0.5 * unit(rng);
  c.config.group_size = 2 + static_cast<int>(rng() % 7);

  const double spread = nucleus ? 0.02 : 0.3;
  ToyPolicy base = ToyPolicy::random(shape, rng(), 0.5);
  c.policy = base;
  const ToyPolicy old_policy(shape, perturbed(base.parameters(), spread, rng));
  const ToyPolicy ref_policy(shape, perturbed(base.parameters(), spread, rng));

  std::normal_distribution<double> reward(0.0, 1.0);
  std::vector<double> rewards;
  for (int i = 0; i < c.config.group_size; ++i) {
    Generation gen = old_policy.sample(c.context, c.params, rng());
    TokenSequence seq;
    seq.tokens = gen.tokens;
    seq.logp_old = gen.logp;
    seq.logp_ref = ref_policy.logprobs(c.context, seq.tokens, c.params);
    c.group.members.push_back(std::move(seq));
    rewards.push_back(reward(rng));
  }
  c.group.rewards = rewards;
  c.group.advantages = group_advantages(rewards);
  return c;
}

inline double objective_at(const GradCheckCase& c, std::span<const double> theta) {
  const ToyPolicy p(c.policy.shape(), {theta.begin(), theta.end()});
  RolloutGroup group = c.group;
  for (auto& seq : group.members) seq.logp_new = p.logprobs(c.context, seq.tokens, c.params);
  return grpo_objective(group, c.config).objective;
}

// Finite differences are meaningless across a clip kink or a nucleus edge;
// such instances are reported so the caller can draw another one.
inline bool well_conditioned(const GradCheckCase& c) {
  RolloutGroup group = c.group;
  const double lo = 1.0 - c.config.clip_epsilon;
  const double hi = 1.0 + c.config.clip_epsilon;
  for (auto& seq : group.members) {
    seq.logp_new = c.policy.logprobs(c.context, seq.tokens, c.params);
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
      if (!std::isfinite(seq.logp_new[t]) || !std::isfinite(seq.logp_ref[t])) return false;
      const double ratio = std::exp(seq.logp_new[t] - seq.logp_old[t]);
      if (std::abs(ratio - lo) < 1e-3 || std::abs(ratio - hi) < 1e-3) return false;
    }
  }
  return true;
}

inline GradCheckResult check_gradient(const GradCheckCase& c, double step = 1e-5) {
  RolloutGroup group = c.group;
  for (auto& seq : group.members) seq.logp_new = c.policy.logprobs(c.context, seq.tokens, c.params);
  const ObjectiveResult res = grpo_objective(group, c.config);
  std::vector<double> analytic(c.policy.parameters().size(), 0.0);
  for (std::size_t i = 0; i < group.members.size(); ++i) {
    c.policy.accumulate_logprob_gradient(c.context, group.members[i].tokens, c.params,
                                         res.dlogp_new[i], analytic);
  }
  std::vector<double> theta(c.policy.parameters().begin(), c.policy.parameters().end());
  double diff2 = 0.0;
  double norm_a = 0.0;
  double norm_n = 0.0;
  GradCheckResult out;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double keep = theta[j];
    theta[j] = keep + step;
    const double up = objective_at(c, theta);
    theta[j] = keep - step;
    const double down = objective_at(c, theta);
    theta[j] = keep;
    const double numeric = (up - down) / (2.0 * step);
    diff2 += (analytic[j] - numeric) * (analytic[j] - numeric);
    norm_a += analytic[j] * analytic[j];
    norm_n += numeric * numeric;
    out.max_abs_error = std::max(out.max_abs_error, std::abs(analytic[j] - numeric));
  }
  const double scale = std::max({std::sqrt(norm_a), std::sqrt(norm_n), 1e-12});
  out.relative_error = std::sqrt(diff2) / scale;
  out.clip_fraction = res.clip_fraction;
  out.mean_kl = res.mean_kl;
  return out;
}

}  // namespace vrts::testing
