#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrts/error.hpp"
#include "vrts/frames.hpp"
#include "vrts/inference.hpp"
#include "vrts/types.hpp"

namespace vrts {

// Per-sample decoding schedule used by every voting method:
// temperature_i = base + step * i, top_p_i = max(min_top_p, base_top_p - step * i).
struct SamplingScheduleSpec {
  double base_temperature = 0.7;
  double temperature_step = 0.1;
  double base_top_p = 0.9;
  double top_p_step = 0.1;
  double min_top_p = 0.5;
  int max_tokens = 1024;
  std::string stop_sentinel = "</answer>";
};

SamplingParams sampling_schedule(int i, const SamplingScheduleSpec& spec = {});

struct TtsConfig {
  int m = 5;
  int n_init = 32;
  int n_max = 128;
  SamplingScheduleSpec schedule{};
  FrameSelection frame_selection = FrameSelection::kUniform;

  // Preset for knowledge-style question sets: cap at 64 frames.
  static TtsConfig knowledge_preset();
};

void validate(const TtsConfig& config);

enum class DecidedBy { kConsensus, kMajorityVote };
std::string_view to_string(DecidedBy decided_by);
DecidedBy parse_decided_by(std::string_view name);

struct SampleRecord {
  SamplingParams params;
  std::string raw;
  std::optional<Letter> answer;
};

struct RoundRecord {
  int budget = 0;
  std::vector<int> frames;
  std::vector<SampleRecord> samples;
  bool consensus = false;
};

struct TtsTrace {
  std::string sample_id;
  Letter gt_answer = 'A';
  std::string difficulty;
  std::vector<RoundRecord> rounds;
  std::optional<Letter> final_answer;
  DecidedBy decided_by = DecidedBy::kMajorityVote;
  long total_frames_processed = 0;
  int total_generations = 0;
  // Non-empty when inference failed; the trace is then partial.
  std::string error;

  bool correct() const { return final_answer.has_value() && *final_answer == gt_answer; }
};

// True iff every answer is present and all are equal.
bool consensus(std::span<const std::optional<Letter>> answers);

// Raised by majority_vote when no answer is present.
class UndecidableVote : public Error {
 public:
  UndecidableVote() : Error("majority vote over answers that are all absent") {}
};

// Plurality over present answers; ties go to the letter that appears first.
Letter majority_vote(std::span<const std::optional<Letter>> answers);

int next_budget(int n, int n_max);

// Raised when inference keeps failing; carries everything gathered so far.
class TtsAborted : public Error {
 public:
  TtsAborted(std::string message, TtsTrace partial)
      : Error(std::move(message)), partial_(std::move(partial)) {}

  const TtsTrace& partial() const { return partial_; }

 private:
  TtsTrace partial_;
};

// Sparse-to-dense controller: m samples per round, stop on unanimity, double
// the frame budget otherwise, majority vote once n_max has been tried.
TtsTrace run_tts(const InferenceInterface& inference, const McqaSample& sample,
                 const TtsConfig& config, std::uint64_t seed);

// Self-consistency at one fixed budget (m = 1 is the single-pass baseline).
TtsTrace run_fixed(const InferenceInterface& inference, const McqaSample& sample, int n, int m,
                   std::uint64_t seed, const SamplingScheduleSpec& schedule = {},
                   FrameSelection selection = FrameSelection::kUniform);

}  // namespace vrts
