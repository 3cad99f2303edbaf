#include "vrts/tts.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vrts/response.hpp"
#include "vrts/seed.hpp"

namespace vrts {

SamplingParams sampling_schedule(int i, const SamplingScheduleSpec& spec) {
  if (i < 0) throw InvalidArgument("sampling_schedule: negative sample index");
  SamplingParams params;
  params.temperature = spec.base_temperature + spec.temperature_step * i;
  params.top_p = std::max(spec.min_top_p, spec.base_top_p - spec.top_p_step * i);
  params.max_tokens = spec.max_tokens;
  params.stop_sentinel = spec.stop_sentinel;
  return params;
}

TtsConfig TtsConfig::knowledge_preset() {
  TtsConfig config;
  config.n_max = 64;
  return config;
}

void validate(const TtsConfig& config) {
  std::vector<std::string> issues;
  if (config.m < 1) issues.push_back("tts.m must be >= 1");
  if (config.n_init < 1) issues.push_back("tts.n_init must be >= 1");
  if (config.n_max < config.n_init) issues.push_back("tts.n_max must be >= tts.n_init");
  const auto& s = config.schedule;
  if (!(s.base_temperature > 0.0)) issues.push_back("tts.schedule.base_temperature must be > 0");
  if (!(s.temperature_step >= 0.0)) issues.push_back("tts.schedule.temperature_step must be >= 0");
  if (!(s.min_top_p > 0.0 && s.min_top_p <= 1.0)) {
    issues.push_back("tts.schedule.min_top_p must lie in (0, 1]");
  }
  if (!(s.base_top_p > 0.0 && s.base_top_p <= 1.0)) {
    issues.push_back("tts.schedule.base_top_p must lie in (0, 1]");
  }
  if (s.max_tokens < 1) issues.push_back("tts.schedule.max_tokens must be >= 1");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::string_view to_string(DecidedBy decided_by) {
  return decided_by == DecidedBy::kConsensus ? "consensus" : "majority_vote";
}

DecidedBy parse_decided_by(std::string_view name) {
  if (name == "consensus") return DecidedBy::kConsensus;
  if (name == "majority_vote") return DecidedBy::kMajorityVote;
  throw InvalidArgument("unknown decided_by '" + std::string(name) + "'");
}

bool consensus(std::span<const std::optional<Letter>> answers) {
  if (answers.empty() || !answers.front().has_value()) return false;
  return std::all_of(answers.begin(), answers.end(),
                     [&](const std::optional<Letter>& a) { return a == answers.front(); });
}

Letter majority_vote(std::span<const std::optional<Letter>> answers) {
  std::array<int, kMaxOptions> counts{};
  std::array<std::size_t, kMaxOptions> first{};
  first.fill(answers.size());
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (!answers[i]) continue;
    const int index = letter_index(*answers[i]);
    if (index < 0 || index >= kMaxOptions) continue;
    if (counts[index]++ == 0) first[index] = i;
  }
  int best = -1;
  for (int j = 0; j < kMaxOptions; ++j) {
    if (counts[j] == 0) continue;
    if (best < 0 || counts[j] > counts[best] ||
        (counts[j] == counts[best] && first[j] < first[best])) {
      best = j;
    }
  }
  if (best < 0) throw UndecidableVote();
  return letter_at(best);
}

int next_budget(int n, int n_max) { return std::min(n * 2, n_max); }

namespace {

// Draws the m samples of one round. Returns false if inference failed, in
// which case `error` is set and the round holds the samples gathered so far.
bool run_round(const InferenceInterface& inference, const McqaSample& sample, int budget,
               int round, int m, std::uint64_t seed, const SamplingScheduleSpec& schedule,
               FrameSelection selection, TtsTrace& trace) {
  RoundRecord record;
  record.budget = budget;
  record.frames = frame_indices(total_frames(sample.video), budget, selection);
  std::vector<std::optional<Letter>> answers;
  answers.reserve(m);
  record.samples.reserve(m);
  bool ok = true;
  for (int i = 0; i < m; ++i) {
    const SamplingParams params = sampling_schedule(i, schedule);
    std::string raw;
    try {
      raw = inference.generate(sample, record.frames, params,
                               derive_seed(seed, sample.id, static_cast<std::uint64_t>(round),
                                           static_cast<std::uint64_t>(i)));
    } catch (const TransportError& e) {
      trace.error = e.what();
      ok = false;
      break;
    }
    const std::optional<Letter> answer = parse_answer(raw, sample.n_options());
    answers.push_back(answer);
    record.samples.push_back({params, std::move(raw), answer});
  }
  const auto done = static_cast<long>(record.samples.size());
  trace.total_generations += static_cast<int>(done);
  trace.total_frames_processed += done * static_cast<long>(record.frames.size());
  record.consensus = ok && consensus(answers);
  trace.rounds.push_back(std::move(record));
  return ok;
}

void decide(TtsTrace& trace) {
  const RoundRecord& last = trace.rounds.back();
  std::vector<std::optional<Letter>> answers;
  for (const auto& s : last.samples) answers.push_back(s.answer);
  if (last.consensus) {
    trace.final_answer = answers.front();
    trace.decided_by = DecidedBy::kConsensus;
    return;
  }
  trace.decided_by = DecidedBy::kMajorityVote;
  try {
    trace.final_answer = majority_vote(answers);
  } catch (const UndecidableVote&) {
    trace.final_answer.reset();
  }
}

TtsTrace start_trace(const McqaSample& sample) {
  TtsTrace trace;
  trace.sample_id = sample.id;
  trace.gt_answer = sample.gt_answer;
  trace.difficulty = sample.difficulty;
  return trace;
}

}  // namespace

TtsTrace run_tts(const InferenceInterface& inference, const McqaSample& sample,
                 const TtsConfig& config, std::uint64_t seed) {
  validate(config);
  TtsTrace trace = start_trace(sample);
  int budget = config.n_init;
  for (int round = 0;; ++round) {
    if (!run_round(inference, sample, budget, round, config.m, seed, config.schedule,
                   config.frame_selection, trace)) {
      throw TtsAborted(trace.error, trace);
    }
    const int next = next_budget(budget, config.n_max);
    if (trace.rounds.back().consensus || next == budget) break;
    budget = next;
  }
  decide(trace);
  return trace;
}

TtsTrace run_fixed(const InferenceInterface& inference, const McqaSample& sample, int n, int m,
                   std::uint64_t seed, const SamplingScheduleSpec& schedule,
                   FrameSelection selection) {
  if (n < 1 || m < 1) throw InvalidArgument("run_fixed: n and m must be >= 1");
  TtsTrace trace = start_trace(sample);
  if (!run_round(inference, sample, n, 0, m, seed, schedule, selection, trace)) {
    throw TtsAborted(trace.error, trace);
  }
  decide(trace);
  return trace;
}

}  // namespace vrts
