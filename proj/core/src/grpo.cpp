#include "vrts/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vrts/error.hpp"
#include "vrts/parallel.hpp"
#include "vrts/response.hpp"
#include "vrts/seed.hpp"

namespace vrts {

void validate(const GrpoConfig& config) {
  std::vector<std::string> issues;
  if (config.group_size < 2) issues.push_back("grpo.group_size must be >= 2");
  if (!(config.clip_epsilon > 0.0 && config.clip_epsilon < 1.0)) {
    issues.push_back("grpo.clip_epsilon must lie in (0, 1)");
  }
  if (!(config.kl_beta >= 0.0)) issues.push_back("grpo.kl_beta must be >= 0");
  if (!(config.learning_rate >= 0.0)) issues.push_back("grpo.learning_rate must be >= 0");
  if (config.batch_size < 1) issues.push_back("grpo.batch_size must be >= 1");
  if (config.epochs < 1) issues.push_back("grpo.epochs must be >= 1");
  if (config.max_steps < 0) issues.push_back("grpo.max_steps must be >= 0");
  if (!(config.std_floor > 0.0)) issues.push_back("grpo.std_floor must be > 0");
  if (!(config.rollout_params.temperature > 0.0)) {
    issues.push_back("grpo.rollout.temperature must be > 0");
  }
  if (!(config.rollout_params.top_p > 0.0 && config.rollout_params.top_p <= 1.0)) {
    issues.push_back("grpo.rollout.top_p must lie in (0, 1]");
  }
  if (config.rollout_params.max_tokens < 1) issues.push_back("grpo.rollout.max_tokens must be >= 1");
  if (config.jobs < 1) issues.push_back("grpo.jobs must be >= 1");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::vector<double> group_advantages(std::span<const double> rewards, double std_floor) {
  const std::size_t g = rewards.size();
  if (g < 2) throw InvalidArgument("group_advantages needs at least two rewards");
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / g;
  double var = 0.0;
  for (const double r : rewards) var += (r - mean) * (r - mean);
  const double std = std::sqrt(var / g);
  std::vector<double> out(g, 0.0);
  if (!(std >= std_floor)) return out;
  for (std::size_t i = 0; i < g; ++i) out[i] = (rewards[i] - mean) / std;
  return out;
}

double kl_per_token(double logp_new, double logp_ref) {
  const double log_r = logp_ref - logp_new;
  // r - log r - 1 loses precision near r = 1; expm1 keeps it.
  return std::expm1(log_r) - log_r;
}

ObjectiveResult grpo_objective(const RolloutGroup& group, const GrpoConfig& config) {
  const std::size_t g = group.members.size();
  if (g == 0) throw InvalidArgument("grpo_objective: empty group");
  if (group.advantages.size() != g) {
    throw InvalidArgument("grpo_objective: advantages/members length mismatch");
  }
  const double lo = 1.0 - config.clip_epsilon;
  const double hi = 1.0 + config.clip_epsilon;
  const double beta = config.kl_beta;

  ObjectiveResult out;
  out.members.resize(g);
  out.dlogp_new.resize(g);
  std::size_t total_tokens = 0;
  for (std::size_t i = 0; i < g; ++i) {
    const TokenSequence& seq = group.members[i];
    const std::size_t len = seq.tokens.size();
    if (len == 0) throw InvalidArgument("grpo_objective: empty member sequence");
    if (seq.logp_new.size() != len || seq.logp_old.size() != len || seq.logp_ref.size() != len) {
      throw InvalidArgument("grpo_objective: token/log-probability length mismatch in member " +
                            std::to_string(i));
    }
    const double advantage = group.advantages[i];
    const double token_scale = 1.0 / (static_cast<double>(g) * static_cast<double>(len));
    auto& grad = out.dlogp_new[i];
    grad.resize(len);
    MemberDiagnostics& diag = out.members[i];
    double sum = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      const double ratio = std::exp(seq.logp_new[t] - seq.logp_old[t]);
      const double unclipped = ratio * advantage;
      const double clipped = std::clamp(ratio, lo, hi) * advantage;
      const bool clip_active = clipped < unclipped;
      const double kl = kl_per_token(seq.logp_new[t], seq.logp_ref[t]);
      sum += std::min(unclipped, clipped) - beta * kl;

      const double ref_ratio = std::exp(seq.logp_ref[t] - seq.logp_new[t]);
      const double d_surrogate = clip_active ? 0.0 : unclipped;
      grad[t] = (d_surrogate + beta * (ref_ratio - 1.0)) * token_scale;

      diag.mean_ratio += ratio;
      diag.mean_kl += kl;
      diag.clip_fraction += clip_active ? 1.0 : 0.0;
    }
    out.mean_ratio += diag.mean_ratio;
    out.mean_kl += diag.mean_kl;
    out.clip_fraction += diag.clip_fraction;
    total_tokens += len;

    diag.objective = sum / static_cast<double>(len);
    diag.mean_ratio /= static_cast<double>(len);
    diag.mean_kl /= static_cast<double>(len);
    diag.clip_fraction /= static_cast<double>(len);
    out.objective += diag.objective;
  }
  out.objective /= static_cast<double>(g);
  out.mean_ratio /= static_cast<double>(total_tokens);
  out.mean_kl /= static_cast<double>(total_tokens);
  out.clip_fraction /= static_cast<double>(total_tokens);
  return out;
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {}

void Optimizer::ascend(std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) throw InvalidArgument("optimizer: size mismatch");
  ++t_;
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t j = 0; j < params.size(); ++j) params[j] += lr_ * grad[j];
    return;
  }
  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t j = 0; j < params.size(); ++j) {
    m_[j] = beta1_ * m_[j] + (1.0 - beta1_) * grad[j];
    v_[j] = beta2_ * v_[j] + (1.0 - beta2_) * grad[j] * grad[j];
    params[j] += lr_ * (m_[j] / c1) / (std::sqrt(v_[j] / c2) + eps_);
  }
}

GrpoTrainer::GrpoTrainer(TrainablePolicy& policy, GrpoConfig config, RewardWeights weights,
                         ContextBuilder context_builder)
    : policy_(policy),
      config_(std::move(config)),
      weights_(weights),
      context_builder_(std::move(context_builder)),
      reference_(policy.snapshot()),
      optimizer_(config_.optimizer, config_.learning_rate) {
  validate(config_);
  validate(weights_);
}

namespace {

struct GroupWork {
  PolicyContext context;
  RolloutGroup group;
  double accuracy_sum = 0.0;
  double format_sum = 0.0;
  bool failed = false;
};

}  // namespace

StepMetrics GrpoTrainer::train_step(std::span<const McqaSample> batch, std::uint64_t seed) {
  if (batch.empty()) throw InvalidArgument("train_step: empty batch");
  const std::unique_ptr<Policy> old_policy = policy_.snapshot();
  const int g = config_.group_size;
  const SamplingParams& params = config_.rollout_params;

  std::vector<GroupWork> work(batch.size());
  parallel_for(batch.size(), config_.jobs, [&](std::size_t b) {
    const McqaSample& sample = batch[b];
    GroupWork& w = work[b];
    w.group.question_id = sample.id;
    try {
      w.context = context_builder_(sample);
      for (int i = 0; i < g; ++i) {
        Generation gen =
            old_policy->sample(w.context, params, derive_seed(seed, sample.id, i));
        if (gen.tokens.empty()) throw Error("empty generation");
        const ParsedResponse parsed = parse_response(gen.text, sample.n_options());
        w.group.rewards.push_back(total_reward(parsed, sample.gt_answer, weights_));
        w.accuracy_sum += accuracy_reward(parsed, sample.gt_answer);
        w.format_sum += format_reward(parsed);
        TokenSequence seq;
        seq.tokens = std::move(gen.tokens);
        seq.logp_old = std::move(gen.logp);
        w.group.members.push_back(std::move(seq));
        w.group.texts.push_back(std::move(gen.text));
      }
    } catch (const Error&) {
      w.failed = true;
    }
  });

  StepMetrics metrics;
  metrics.step = step_++;
  metrics.n_groups = static_cast<int>(batch.size());
  std::vector<double> grad(policy_.parameters().size(), 0.0);
  int contributing = 0;
  int scored_members = 0;
  for (GroupWork& w : work) {
    if (w.failed) {
      ++metrics.n_failed;
      continue;
    }
    for (const double r : w.group.rewards) metrics.mean_reward += r;
    metrics.mean_accuracy_reward += w.accuracy_sum;
    metrics.mean_format_reward += w.format_sum;
    scored_members += g;

    w.group.advantages = group_advantages(w.group.rewards, config_.std_floor);
    const bool degenerate = std::all_of(w.group.advantages.begin(), w.group.advantages.end(),
                                        [](double s) { return s == 0.0; });
    if (degenerate) {
      ++metrics.n_degenerate;
      continue;
    }
    for (TokenSequence& seq : w.group.members) {
      seq.logp_new = policy_.logprobs(w.context, seq.tokens, params);
      seq.logp_ref = reference_->logprobs(w.context, seq.tokens, params);
    }
    const ObjectiveResult result = grpo_objective(w.group, config_);
    for (std::size_t i = 0; i < w.group.members.size(); ++i) {
      policy_.accumulate_logprob_gradient(w.context, w.group.members[i].tokens, params,
                                          result.dlogp_new[i], grad);
    }
    metrics.objective += result.objective;
    metrics.mean_kl += result.mean_kl;
    metrics.mean_ratio += result.mean_ratio;
    metrics.clip_fraction += result.clip_fraction;
    ++contributing;
  }

  if (scored_members > 0) {
    metrics.mean_reward /= scored_members;
    metrics.mean_accuracy_reward /= scored_members;
    metrics.mean_format_reward /= scored_members;
  }
  if (contributing > 0) {
    const double inv = 1.0 / contributing;
    metrics.objective *= inv;
    metrics.mean_kl *= inv;
    metrics.mean_ratio *= inv;
    metrics.clip_fraction *= inv;
    double norm2 = 0.0;
    for (double& x : grad) {
      x *= inv;
      norm2 += x * x;
    }
    metrics.grad_norm = std::sqrt(norm2);
    std::vector<double> updated(policy_.parameters().begin(), policy_.parameters().end());
    optimizer_.ascend(updated, grad);
    policy_.set_parameters(updated);
    metrics.updated = true;
  }
  return metrics;
}

TrainingReport train(TrainablePolicy& policy, std::span<const McqaSample> dataset,
                     const GrpoConfig& config, const RewardWeights& weights,
                     const ContextBuilder& context_builder, std::uint64_t seed,
                     const StepCallback& on_step) {
  if (dataset.empty()) throw InvalidArgument("train: empty dataset");
  TrainingReport report;
  report.initial_parameters.assign(policy.parameters().begin(), policy.parameters().end());
  GrpoTrainer trainer(policy, config, weights, context_builder);

  std::vector<std::size_t> order(dataset.size());
  int step = 0;
  bool done = false;
  for (int epoch = 0; epoch < config.epochs && !done; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(seed, "epoch", static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      if (config.max_steps > 0 && step >= config.max_steps) {
        done = true;
        break;
      }
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<McqaSample> batch;
      batch.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) batch.push_back(dataset[order[k]]);
      StepMetrics metrics =
          trainer.train_step(batch, derive_seed(seed, "step", static_cast<std::uint64_t>(step)));
      metrics.step = step++;
      if (on_step) on_step(metrics, policy);
      report.steps.push_back(metrics);
    }
  }
  report.final_parameters.assign(policy.parameters().begin(), policy.parameters().end());
  return report;
}

}  // namespace vrts
