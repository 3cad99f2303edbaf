#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vrts/inference.hpp"
#include "vrts/toy_policy.hpp"
#include "vrts/tts.hpp"
#include "vrts/types.hpp"

namespace vrts {

struct CorpusConfig {
  int n_samples = 700;
  int n_options = 4;
  double hard_fraction = 0.5;
  int total_frames = 128;
  // Budgets the hard samples are built against.
  int n_init = 32;
  int n_max = 128;
  // Hard samples: ground-truth evidence lives in a window this wide.
  int window_width = 16;
  // Easy samples: per-frame probability of ground-truth evidence.
  double easy_evidence_rate = 0.15;
  // Per-frame probability of a distractor label (easy samples).
  double distractor_rate = 0.04;
  std::string id_prefix = "s";
};

void validate(const CorpusConfig& config);

// Deterministic given the seed. Hard samples keep their ground-truth evidence
// in a short window that avoids every frame sampled at n_init, so only denser
// budgets see it.
std::vector<McqaSample> generate_corpus(const CorpusConfig& config, std::uint64_t seed);

std::vector<int> evidence_counts(const SyntheticVideo& video, std::span<const int> frames,
                                 int n_options);

// Point mass on the evidence argmax; uniform over tied (or all) options.
std::vector<double> oracle_answer(const SyntheticVideo& video, std::span<const int> frames,
                                  int n_options);

const SyntheticVideo& synthetic_video(const McqaSample& sample);

Generation toy_generate(const ToyPolicy& policy, const McqaSample& sample,
                        std::span<const int> frames, const SamplingParams& params,
                        std::uint64_t seed);

// Answers by sampling the oracle distribution (well-formed output).
class OracleInference final : public InferenceInterface {
 public:
  std::string generate(const McqaSample& sample, std::span<const int> frames,
                       const SamplingParams& params, std::uint64_t seed) const override;
};

// Uniformly random letter, ignores the video.
class UniformInference final : public InferenceInterface {
 public:
  std::string generate(const McqaSample& sample, std::span<const int> frames,
                       const SamplingParams& params, std::uint64_t seed) const override;
};

struct EvalMode {
  enum class Kind { kFixed, kTts };

  Kind kind = Kind::kTts;
  int n = 32;  // fixed mode
  int m = 1;   // fixed mode
  TtsConfig tts{};

  static EvalMode fixed(int n, int m, SamplingScheduleSpec schedule = {},
                        FrameSelection selection = FrameSelection::kUniform);
  static EvalMode adaptive(TtsConfig config);
};

struct EvalBreakdown {
  int count = 0;
  int correct = 0;
  double accuracy = 0.0;
  double mean_frames = 0.0;
  double mean_generations = 0.0;
};

struct EvalReport {
  EvalBreakdown overall;
  int n_errors = 0;
  std::map<std::string, EvalBreakdown> by_difficulty;
};

EvalReport summarize(std::span<const TtsTrace> traces);

struct EvalRun {
  EvalReport report;
  std::vector<TtsTrace> traces;
};

// Runs `mode` on every sample (in parallel up to `jobs`). Transport failures
// are recorded on the affected trace instead of aborting the run.
EvalRun evaluate(const InferenceInterface& inference, std::span<const McqaSample> dataset,
                 const EvalMode& mode, std::uint64_t seed, int jobs = 1);

}  // namespace vrts
