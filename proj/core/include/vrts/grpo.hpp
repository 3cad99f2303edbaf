#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vrts/policy.hpp"
#include "vrts/rewards.hpp"
#include "vrts/types.hpp"

namespace vrts {

// Learning rate used for 7B-scale models. The toy policy default is larger.
inline constexpr double kLargeModelLearningRate = 1e-6;
inline constexpr double kToyLearningRate = 1e-2;

enum class OptimizerKind { kSgd, kAdam };

struct GrpoConfig {
  int group_size = 8;
  double clip_epsilon = 0.2;
  double kl_beta = 0.04;
  double learning_rate = kToyLearningRate;
  int batch_size = 16;
  int epochs = 1;
  int max_steps = 0;  // 0 = run every batch of every epoch
  double std_floor = 1e-8;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  SamplingParams rollout_params{};
  int jobs = 1;
};

// Throws ConfigError listing every invalid field.
void validate(const GrpoConfig& config);

struct TokenSequence {
  std::vector<int> tokens;
  std::vector<double> logp_new;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
};

struct RolloutGroup {
  std::string question_id;
  std::vector<std::string> texts;
  std::vector<TokenSequence> members;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

// S_i = (R_i - mean R) / std R with the population std. Groups whose std is
// below `std_floor` get all-zero advantages. Throws InvalidArgument for G < 2.
std::vector<double> group_advantages(std::span<const double> rewards, double std_floor = 1e-8);

// k3 estimator: r - log r - 1 with r = exp(logp_ref - logp_new).
double kl_per_token(double logp_new, double logp_ref);

struct MemberDiagnostics {
  double objective = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double mean_kl = 0.0;
};

struct ObjectiveResult {
  double objective = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double mean_kl = 0.0;
  std::vector<MemberDiagnostics> members;
  // d objective / d logp_new[i][t].
  std::vector<std::vector<double>> dlogp_new;
};

// Token-level clipped surrogate with a per-token k3 penalty, length-normalized
// per member and averaged over the group.
ObjectiveResult grpo_objective(const RolloutGroup& group, const GrpoConfig& config);

// In-place gradient *ascent* on a flat parameter vector.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate);

  void ascend(std::span<double> params, std::span<const double> grad);
  std::int64_t steps() const { return t_; }

 private:
  OptimizerKind kind_;
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::int64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

using ContextBuilder = std::function<PolicyContext(const McqaSample&)>;

struct StepMetrics {
  int step = 0;
  int n_groups = 0;
  int n_degenerate = 0;
  int n_failed = 0;
  double mean_reward = 0.0;
  double mean_accuracy_reward = 0.0;
  double mean_format_reward = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double mean_kl = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  bool updated = false;

  bool operator==(const StepMetrics&) const = default;
};

class GrpoTrainer {
 public:
  // The reference policy is frozen at construction.
  GrpoTrainer(TrainablePolicy& policy, GrpoConfig config, RewardWeights weights,
              ContextBuilder context_builder);

  // Samples G rollouts per question from a snapshot of the current policy,
  // scores them, and applies one ascent step on the batch-mean objective.
  StepMetrics train_step(std::span<const McqaSample> batch, std::uint64_t seed);

  const Policy& reference() const { return *reference_; }
  const GrpoConfig& config() const { return config_; }

 private:
  TrainablePolicy& policy_;
  GrpoConfig config_;
  RewardWeights weights_;
  ContextBuilder context_builder_;
  std::unique_ptr<Policy> reference_;
  Optimizer optimizer_;
  int step_ = 0;
};

struct TrainingReport {
  std::vector<StepMetrics> steps;
  std::vector<double> initial_parameters;
  std::vector<double> final_parameters;
};

using StepCallback = std::function<void(const StepMetrics&, const TrainablePolicy&)>;

// Epochs over seeded shuffles of `dataset` in batches of batch_size.
TrainingReport train(TrainablePolicy& policy, std::span<const McqaSample> dataset,
                     const GrpoConfig& config, const RewardWeights& weights,
                     const ContextBuilder& context_builder, std::uint64_t seed,
                     const StepCallback& on_step = {});

}  // namespace vrts
