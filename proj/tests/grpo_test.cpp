#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "grad_check.hpp"
#include "test_util.hpp"
#include "vrts/frames.hpp"
#include "vrts/grpo.hpp"
#include "vrts/simenv.hpp"
#include "vrts/toy_policy.hpp"

namespace vrts {
namespace {

using testing::make_sample;

TEST(GroupAdvantages, DegenerateGroupIsZero) {
  const std::vector<double> r{1, 1, 1, 1};
  EXPECT_EQ(group_advantages(r), (std::vector<double>{0, 0, 0, 0}));
}

TEST(GroupAdvantages, HandComputedExample) {
  const std::vector<double> r{2, 0, 0, 0};
  const auto s = group_advantages(r);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_NEAR(s[0], 1.7320508, 1e-7);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(s[i], -0.5773503, 1e-7);
}

TEST(GroupAdvantages, NeedsTwoMembers) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(group_advantages(one), InvalidArgument);
  EXPECT_THROW(group_advantages(std::vector<double>{}), InvalidArgument);
}

TEST(GroupAdvantages, StdFloorRespected) {
  const std::vector<double> r{1.0, 1.0 + 1e-10};
  EXPECT_EQ(group_advantages(r, 1e-8), (std::vector<double>{0, 0}));
  EXPECT_NE(group_advantages(r, 1e-12)[0], 0.0);
}

TEST(GroupAdvantages, MeanZeroStdOne) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> r(2 + rng() % 15);
    for (double& x : r) x = u(rng);
    const auto s = group_advantages(r);
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
    double var = 0;
    for (double x : s) var += (x - mean) * (x - mean);
    EXPECT_LT(std::abs(mean), 1e-12);
    EXPECT_NEAR(std::sqrt(var / s.size()), 1.0, 1e-9);
  }
}

TEST(KlPerToken, Values) {
  EXPECT_EQ(kl_per_token(-1.3, -1.3), 0.0);
  EXPECT_NEAR(kl_per_token(-2.0, -1.0), std::numbers::e - 2.0, 1e-12);
  EXPECT_NEAR(kl_per_token(-1.0, -2.0), 1.0 / std::numbers::e, 1e-12);
}

TEST(KlPerToken, NonNegative) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-30.0, 0.0);
  for (int i = 0; i < 100000; ++i) ASSERT_GE(kl_per_token(u(rng), u(rng)), 0.0);
}

RolloutGroup uniform_group(std::vector<std::vector<double>> logps, std::vector<double> advantages) {
  RolloutGroup g;
  for (auto& lp : logps) {
    TokenSequence seq;
    seq.tokens.assign(lp.size(), 0);
    seq.logp_new = lp;
    seq.logp_old = lp;
    seq.logp_ref = lp;
    g.members.push_back(std::move(seq));
  }
  g.advantages = std::move(advantages);
  return g;
}

TEST(GrpoObjective, EqualPoliciesGiveMeanAdvantage) {
  const std::vector<double> rewards{1, 0, 2, 0};
  auto g = uniform_group({{-0.1, -0.2}, {-1.0}, {-0.5, -0.5, -0.5}, {-2.0}},
                         group_advantages(rewards));
  const auto res = grpo_objective(g, GrpoConfig{});
  EXPECT_NEAR(res.objective, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(res.mean_ratio, 1.0);
  EXPECT_EQ(res.mean_kl, 0.0);
  EXPECT_EQ(res.clip_fraction, 0.0);
}

TEST(GrpoObjective, ClippedPositiveAdvantage) {
  GrpoConfig config;
  config.kl_beta = 0.0;
  const double eps = config.clip_epsilon;
  auto g = uniform_group({{-1.0, -1.5, -0.2}}, {1.0});
  for (double& lp : g.members[0].logp_new) lp += std::log1p(2 * eps);
  g.members[0].logp_ref = g.members[0].logp_new;
  const auto res = grpo_objective(g, config);
  EXPECT_NEAR(res.objective, 1.0 + eps, 1e-12);
  EXPECT_EQ(res.clip_fraction, 1.0);
  for (double d : res.dlogp_new[0]) EXPECT_EQ(d, 0.0);
}

TEST(GrpoObjective, MirroredClipNegativeAdvantage) {
  GrpoConfig config;
  config.kl_beta = 0.0;
  const double eps = config.clip_epsilon;
  auto g = uniform_group({{-1.0, -0.7}}, {-1.0});
  for (double& lp : g.members[0].logp_new) lp += std::log(1.0 - 2 * eps);
  const auto res = grpo_objective(g, config);
  EXPECT_NEAR(res.objective, -(1.0 - eps), 1e-12);
  for (double d : res.dlogp_new[0]) EXPECT_EQ(d, 0.0);
}

TEST(GrpoObjective, UnclippedRegionPassesGradient) {
  GrpoConfig config;
  config.kl_beta = 0.0;
  const std::vector<double> adv{0.7, -0.7};
  auto g = uniform_group({{-1.0, -2.0, -0.5}, {-0.3}}, adv);
  g.members[0].logp_new[1] += 0.05;
  g.members[1].logp_new[0] -= 0.05;
  const auto res = grpo_objective(g, config);
  // d/dlogp = rho * S / (G |o|), i.e. d/drho = S / (G |o|).
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& seq = g.members[i];
    const double len = static_cast<double>(seq.tokens.size());
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
      const double rho = std::exp(seq.logp_new[t] - seq.logp_old[t]);
      EXPECT_NEAR(res.dlogp_new[i][t] / rho, adv[i] / (2.0 * len), 1e-15);
    }
  }
  // And the value is the importance-weighted advantage mean.
  double expected = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    double sum = 0.0;
    for (std::size_t t = 0; t < g.members[i].tokens.size(); ++t) {
      sum += std::exp(g.members[i].logp_new[t] - g.members[i].logp_old[t]) * adv[i];
    }
    expected += sum / g.members[i].tokens.size();
  }
  EXPECT_NEAR(res.objective, expected / 2.0, 1e-15);
}

TEST(GrpoObjective, LengthMismatchIsAnError) {
  auto g = uniform_group({{-1.0, -1.0}}, {1.0});
  g.members[0].logp_ref.pop_back();
  EXPECT_THROW(grpo_objective(g, GrpoConfig{}), InvalidArgument);
  g = uniform_group({{-1.0}}, {1.0, 2.0});
  EXPECT_THROW(grpo_objective(g, GrpoConfig{}), InvalidArgument);
}

TEST(GrpoObjective, FiniteDifferenceGradient) {
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 20; ++seed) {
    const auto c = testing::make_grad_case(seed);
    if (!testing::well_conditioned(c)) continue;
    const auto r = testing::check_gradient(c);
    EXPECT_LT(r.relative_error, 1e-4) << "seed " << seed;
    ++checked;
  }
}

TEST(Optimizer, SgdAscends) {
  Optimizer opt(OptimizerKind::kSgd, 0.5);
  std::vector<double> p{1.0, -1.0};
  const std::vector<double> g{2.0, 4.0};
  opt.ascend(p, g);
  EXPECT_EQ(p, (std::vector<double>{2.0, 1.0}));
}

TEST(Optimizer, AdamFirstStepIsLearningRateTimesSign) {
  Optimizer opt(OptimizerKind::kAdam, 0.1);
  std::vector<double> p{0.0, 0.0};
  const std::vector<double> g{3.0, -0.01};
  opt.ascend(p, g);
  EXPECT_NEAR(p[0], 0.1, 1e-6);
  EXPECT_NEAR(p[1], -0.1, 1e-4);
}

std::vector<McqaSample> toy_batch(int n, std::uint64_t seed) {
  CorpusConfig cfg;
  cfg.n_samples = n;
  return generate_corpus(cfg, seed);
}

ContextBuilder sparse_context() {
  return [](const McqaSample& s) {
    return PolicyContext{&s, frame_indices(total_frames(s.video), 32)};
  };
}

TEST(TrainStep, DeterministicPerSeed) {
  const auto batch = toy_batch(16, 4);
  auto run = [&] {
    ToyPolicy policy = ToyPolicy::random({}, 1);
    GrpoTrainer trainer(policy, GrpoConfig{}, {}, sparse_context());
    std::vector<StepMetrics> m;
    for (int s = 0; s < 3; ++s) m.push_back(trainer.train_step(batch, 100 + s));
    return std::make_pair(m, std::vector<double>(policy.parameters().begin(),
                                                 policy.parameters().end()));
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(TrainStep, ParallelMatchesSerial) {
  const auto batch = toy_batch(16, 4);
  auto run = [&](int jobs) {
    ToyPolicy policy = ToyPolicy::random({}, 1);
    GrpoConfig config;
    config.jobs = jobs;
    GrpoTrainer trainer(policy, config, {}, sparse_context());
    const StepMetrics m = trainer.train_step(batch, 7);
    return std::make_pair(m, std::vector<double>(policy.parameters().begin(),
                                                 policy.parameters().end()));
  };
  EXPECT_EQ(run(1), run(4));
}

// Always answers A regardless of parameters.
class ConstantPolicy final : public TrainablePolicy {
 public:
  Generation sample(const PolicyContext&, const SamplingParams&, std::uint64_t) const override {
    return {"<think>x</think><answer>A</answer>", {0}, {0.0}};
  }
  std::vector<double> logprobs(const PolicyContext&, std::span<const int> tokens,
                               const SamplingParams&) const override {
    return std::vector<double>(tokens.size(), 0.0);
  }
  std::unique_ptr<Policy> snapshot() const override {
    return std::make_unique<ConstantPolicy>(*this);
  }
  std::span<const double> parameters() const override { return params_; }
  void set_parameters(std::span<const double> v) override { params_.assign(v.begin(), v.end()); }
  void accumulate_logprob_gradient(const PolicyContext&, std::span<const int>,
                                   const SamplingParams&, std::span<const double>,
                                   std::span<double> grad) const override {
    for (double& g : grad) g += 1.0;
  }

 private:
  std::vector<double> params_{0.5, -0.5};
};

TEST(TrainStep, AllDegenerateMeansNoUpdate) {
  ConstantPolicy policy;
  GrpoTrainer trainer(policy, GrpoConfig{}, {},
                      [](const McqaSample& s) { return PolicyContext{&s, {0}}; });
  std::vector<McqaSample> batch{make_sample("a", 4, 'A'), make_sample("b", 4, 'B')};
  const StepMetrics m = trainer.train_step(batch, 1);
  EXPECT_EQ(m.n_degenerate, 2);
  EXPECT_FALSE(m.updated);
  EXPECT_EQ(m.grad_norm, 0.0);
  EXPECT_EQ(std::vector<double>(policy.parameters().begin(), policy.parameters().end()),
            (std::vector<double>{0.5, -0.5}));
  EXPECT_DOUBLE_EQ(m.mean_accuracy_reward, 0.5);
  EXPECT_DOUBLE_EQ(m.mean_format_reward, 1.0);
}

TEST(TrainStep, FailedGroupsAreCounted) {
  ToyPolicy policy = ToyPolicy::random({}, 2);
  GrpoTrainer trainer(policy, GrpoConfig{}, {}, [](const McqaSample& s) -> PolicyContext {
    if (s.id == "bad") throw Error("cannot build context");
    return PolicyContext{&s, frame_indices(total_frames(s.video), 32)};
  });
  auto batch = toy_batch(4, 8);
  batch[1].id = "bad";
  const StepMetrics m = trainer.train_step(batch, 3);
  EXPECT_EQ(m.n_failed, 1);
  EXPECT_EQ(m.n_groups, 4);
}

TEST(Train, StepCountAndZeroLearningRate) {
  const auto data = toy_batch(48, 5);
  ToyPolicy policy = ToyPolicy::random({}, 3);
  GrpoConfig config;
  config.learning_rate = 0.0;
  const auto report = train(policy, data, config, {}, sparse_context(), 1);
  EXPECT_EQ(report.steps.size(), 3u);
  EXPECT_EQ(report.final_parameters, report.initial_parameters);
  for (std::size_t i = 0; i < report.steps.size(); ++i) EXPECT_EQ(report.steps[i].step, (int)i);
}

TEST(Train, MaxStepsCapsEpochs) {
  const auto data = toy_batch(32, 5);
  ToyPolicy policy = ToyPolicy::random({}, 3);
  GrpoConfig config;
  config.epochs = 10;
  config.max_steps = 5;
  EXPECT_EQ(train(policy, data, config, {}, sparse_context(), 1).steps.size(), 5u);
}

TEST(Train, ReferenceStaysFrozen) {
  const auto data = toy_batch(32, 6);
  ToyPolicy policy = ToyPolicy::random({}, 3);
  const std::vector<double> init(policy.parameters().begin(), policy.parameters().end());
  GrpoTrainer trainer(policy, GrpoConfig{}, {}, sparse_context());
  trainer.train_step(std::span(data).subspan(0, 16), 1);
  trainer.train_step(std::span(data).subspan(16, 16), 2);
  const PolicyContext ctx{&data[0], frame_indices(128, 32)};
  const Generation gen = policy.sample(ctx, {}, 5);
  const ToyPolicy frozen(policy.shape(), init);
  EXPECT_EQ(trainer.reference().logprobs(ctx, gen.tokens, {}),
            frozen.logprobs(ctx, gen.tokens, {}));
}

TEST(GrpoConfig, ValidationListsEveryProblem) {
  GrpoConfig c;
  c.group_size = 1;
  c.clip_epsilon = 1.5;
  c.batch_size = 0;
  try {
    validate(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.issues().size(), 3u);
  }
}

}  // namespace
}  // namespace vrts
