#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vrts/frames.hpp"
#include "vrts/grpo.hpp"
#include "vrts/response.hpp"
#include "vrts/sampling.hpp"
#include "vrts/simenv.hpp"
#include "vrts/toy_policy.hpp"
#include "vrts/tts.hpp"

namespace {

using namespace vrts;

std::vector<McqaSample> corpus(int n) {
  CorpusConfig cfg;
  cfg.n_samples = n;
  return generate_corpus(cfg, 1);
}

void BM_GroupAdvantages(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> rewards(state.range(0));
  for (double& r : rewards) r = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(group_advantages(rewards));
}
BENCHMARK(BM_GroupAdvantages)->Arg(8)->Arg(64);

void BM_ParseResponse(benchmark::State& state) {
  const std::string raw = "<think>the second frame shows a red mug</think><answer>B</answer>";
  for (auto _ : state) benchmark::DoNotOptimize(parse_response(raw, 4));
}
BENCHMARK(BM_ParseResponse);

void BM_FrameIndices(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(frame_indices(4096, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_FrameIndices)->Arg(32)->Arg(128);

void BM_NucleusLogProbs(benchmark::State& state) {
  const std::vector<double> logits{0.3, -1.2, 2.0, 0.1, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(nucleus_log_probs(logits, 0.9, 0.7));
}
BENCHMARK(BM_NucleusLogProbs);

void BM_ToyPolicySample(benchmark::State& state) {
  const auto data = corpus(1);
  const auto policy = ToyPolicy::random({}, 3, 0.5);
  const PolicyContext ctx{&data[0], frame_indices(128, 32)};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(policy.sample(ctx, {}, ++seed));
}
BENCHMARK(BM_ToyPolicySample);

void BM_GrpoObjective(benchmark::State& state) {
  const auto data = corpus(1);
  const auto policy = ToyPolicy::random({}, 3, 0.5);
  const PolicyContext ctx{&data[0], frame_indices(128, 32)};
  RolloutGroup group;
  std::vector<double> rewards;
  for (int i = 0; i < 8; ++i) {
    Generation gen = policy.sample(ctx, {}, i);
    TokenSequence seq;
    seq.tokens = gen.tokens;
    seq.logp_old = gen.logp;
    seq.logp_new = gen.logp;
    for (double& lp : seq.logp_new) lp += 0.05 * (i - 4);
    seq.logp_ref = gen.logp;
    group.members.push_back(std::move(seq));
    rewards.push_back(i % 3);
  }
  group.advantages = group_advantages(rewards);
  const GrpoConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(grpo_objective(group, config));
}
BENCHMARK(BM_GrpoObjective);

void BM_TrainStep(benchmark::State& state) {
  const auto data = corpus(16);
  ToyPolicy policy = ToyPolicy::random({}, 3);
  GrpoTrainer trainer(policy, GrpoConfig{}, {}, [](const McqaSample& s) {
    return PolicyContext{&s, frame_indices(total_frames(s.video), 32)};
  });
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(trainer.train_step(data, ++seed));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMicrosecond);

void BM_RunTtsOracle(benchmark::State& state) {
  const auto data = corpus(64);
  OracleInference oracle;
  TtsConfig config;
  config.m = static_cast<int>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_tts(oracle, data[i++ % data.size()], config, 1));
  }
}
BENCHMARK(BM_RunTtsOracle)->Arg(1)->Arg(5)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
