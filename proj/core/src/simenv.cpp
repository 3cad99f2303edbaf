#include "vrts/simenv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "vrts/error.hpp"
#include "vrts/frames.hpp"
#include "vrts/parallel.hpp"
#include "vrts/response.hpp"
#include "vrts/sampling.hpp"

namespace vrts {
namespace {

constexpr std::array<const char*, 12> kItems = {
    "a red key",     "a blue mug",     "a green notebook", "a silver watch",
    "a yellow ball", "a black wallet", "a paper map",      "a glass bottle",
    "a wooden spoon", "a phone charger", "a pair of gloves", "a toy car"};

constexpr int kMaxResamples = 10000;

std::string numbered(const std::string& prefix, const char* tag, int index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%s%05d", tag, index);
  return prefix + "-" + buffer;
}

bool contains(const std::vector<int>& sorted, int value) {
  return std::binary_search(sorted.begin(), sorted.end(), value);
}

// Window starts whose layout satisfies the hard-sample construction.
std::vector<int> feasible_window_starts(const CorpusConfig& config) {
  const int total = config.total_frames;
  const int width = config.window_width;
  const std::vector<int> sparse = frame_indices(total, config.n_init);
  const std::vector<int> middle =
      frame_indices(total, next_budget(config.n_init, config.n_max));
  std::vector<int> starts;
  for (int start = 0; start + width <= total; ++start) {
    int reveal = 0;
    for (int f = start; f < start + width; ++f) {
      if (!contains(sparse, f) && contains(middle, f)) ++reveal;
    }
    if (reveal >= 2) starts.push_back(start);
  }
  return starts;
}

std::vector<Option> make_options(int n_options, std::mt19937_64& rng) {
  std::vector<std::string> items;
  for (int i = 0; i < n_options; ++i) {
    if (i < static_cast<int>(kItems.size())) {
      items.emplace_back(kItems[i]);
    } else {
      items.push_back("item " + std::to_string(i + 1));
    }
  }
  std::shuffle(items.begin(), items.end(), rng);
  std::vector<Option> options;
  for (int i = 0; i < n_options; ++i) options.push_back({letter_at(i), items[i]});
  return options;
}

SyntheticVideo make_easy_video(const CorpusConfig& config, int gt, std::mt19937_64& rng) {
  const std::vector<int> sparse = frame_indices(config.total_frames, config.n_init);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::uniform_int_distribution<int> other(1, config.n_options - 1);
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    SyntheticVideo video;
    video.frame_evidence.assign(config.total_frames, '\0');
    for (Letter& label : video.frame_evidence) {
      const double u = uniform(rng);
      if (u < config.easy_evidence_rate) {
        label = letter_at(gt);
      } else if (u < config.easy_evidence_rate + config.distractor_rate) {
        label = letter_at((gt + other(rng)) % config.n_options);
      }
    }
    // The ground truth must already win outright at the sparsest budget.
    const std::vector<double> sparse_view = oracle_answer(video, sparse, config.n_options);
    const std::vector<int> all = frame_indices(config.total_frames, config.total_frames);
    const std::vector<double> full_view = oracle_answer(video, all, config.n_options);
    if (sparse_view[gt] == 1.0 && full_view[gt] == 1.0) return video;
  }
  throw ConfigError({"corpus: easy_evidence_rate too low to make the answer visible at n_init"});
}

// Ground-truth evidence fills the window except the frames the sparsest budget
// samples, so n_init sees no evidence at all and the next budget does.
SyntheticVideo make_hard_video(const CorpusConfig& config, int gt,
                               const std::vector<int>& starts, std::mt19937_64& rng) {
  const std::vector<int> sparse = frame_indices(config.total_frames, config.n_init);
  const int start = starts[std::uniform_int_distribution<std::size_t>(0, starts.size() - 1)(rng)];
  SyntheticVideo video;
  video.frame_evidence.assign(config.total_frames, '\0');
  video.evidence_window = SyntheticVideo::Window{start, config.window_width};
  for (int f = start; f < start + config.window_width; ++f) {
    if (!contains(sparse, f)) video.frame_evidence[f] = letter_at(gt);
  }
  return video;
}

}  // namespace

void validate(const CorpusConfig& config) {
  std::vector<std::string> issues;
  if (config.n_samples < 1) issues.push_back("corpus.n_samples must be >= 1");
  if (config.n_options < 2 || config.n_options > kMaxOptions) {
    issues.push_back("corpus.n_options must lie in [2, 26]");
  }
  if (!(config.hard_fraction >= 0.0 && config.hard_fraction <= 1.0)) {
    issues.push_back("corpus.hard_fraction must lie in [0, 1]");
  }
  if (config.total_frames < 1) issues.push_back("corpus.total_frames must be >= 1");
  if (config.n_init < 1 || config.n_init > config.n_max) {
    issues.push_back("corpus.n_init must lie in [1, n_max]");
  }
  if (config.window_width < 1) issues.push_back("corpus.window_width must be >= 1");
  if (!(config.easy_evidence_rate > 0.0 && config.easy_evidence_rate <= 1.0)) {
    issues.push_back("corpus.easy_evidence_rate must lie in (0, 1]");
  }
  if (!(config.distractor_rate >= 0.0) ||
      config.easy_evidence_rate + config.distractor_rate > 1.0) {
    issues.push_back("corpus.distractor_rate must be >= 0 and leave room for evidence");
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::vector<McqaSample> generate_corpus(const CorpusConfig& config, std::uint64_t seed) {
  validate(config);
  const int n_hard =
      static_cast<int>(std::lround(config.hard_fraction * static_cast<double>(config.n_samples)));

  std::vector<int> starts;
  if (n_hard > 0) {
    std::vector<std::string> issues;
    if (config.n_init >= config.n_max) {
      issues.push_back("corpus: hard samples need n_init < n_max");
    }
    if (config.window_width * 8 > config.total_frames) {
      issues.push_back("corpus: window_width must be <= total_frames / 8");
    }
    const int dense = std::min(config.n_max, config.total_frames);
    if (config.window_width * dense < 4 * config.total_frames) {
      issues.push_back("corpus: window_width * n_max / total_frames must be >= 4");
    }
    if (issues.empty()) {
      starts = feasible_window_starts(config);
      if (starts.empty()) {
        issues.push_back("corpus: no window placement hides the evidence at n_init "
                         "while revealing it at the next budget");
      }
    }
    if (!issues.empty()) throw ConfigError(std::move(issues));
  }

  std::mt19937_64 rng(seed);
  std::vector<bool> hard(config.n_samples, false);
  std::fill(hard.begin(), hard.begin() + n_hard, true);
  std::shuffle(hard.begin(), hard.end(), rng);

  std::vector<McqaSample> out;
  out.reserve(config.n_samples);
  std::uniform_int_distribution<int> pick_gt(0, config.n_options - 1);
  for (int i = 0; i < config.n_samples; ++i) {
    McqaSample sample;
    sample.id = numbered(config.id_prefix, "q", i);
    sample.question = "Which item does the person pick up in the video?";
    sample.options = make_options(config.n_options, rng);
    const int gt = pick_gt(rng);
    sample.gt_answer = letter_at(gt);
    SyntheticVideo video = hard[i] ? make_hard_video(config, gt, starts, rng)
                                   : make_easy_video(config, gt, rng);
    video.id = numbered(config.id_prefix, "v", i);
    sample.video = std::move(video);
    sample.difficulty = hard[i] ? "hard" : "easy";
    out.push_back(std::move(sample));
  }
  return out;
}

std::vector<int> evidence_counts(const SyntheticVideo& video, std::span<const int> frames,
                                 int n_options) {
  std::vector<int> counts(n_options, 0);
  for (const int f : frames) {
    if (f < 0 || f >= video.total_frames()) throw InvalidArgument("frame index out of range");
    const Letter label = video.frame_evidence[f];
    if (label == '\0') continue;
    const int option = letter_index(label);
    if (option >= 0 && option < n_options) ++counts[option];
  }
  return counts;
}

std::vector<double> oracle_answer(const SyntheticVideo& video, std::span<const int> frames,
                                  int n_options) {
  const std::vector<int> counts = evidence_counts(video, frames, n_options);
  const int best = *std::max_element(counts.begin(), counts.end());
  std::vector<double> out(n_options, 0.0);
  const auto tied = std::count(counts.begin(), counts.end(), best);
  for (int j = 0; j < n_options; ++j) {
    if (counts[j] == best) out[j] = 1.0 / static_cast<double>(tied);
  }
  return out;
}

const SyntheticVideo& synthetic_video(const McqaSample& sample) {
  const auto* video = std::get_if<SyntheticVideo>(&sample.video);
  if (video == nullptr) throw InvalidArgument("sample " + sample.id + " has no synthetic video");
  return *video;
}

Generation toy_generate(const ToyPolicy& policy, const McqaSample& sample,
                        std::span<const int> frames, const SamplingParams& params,
                        std::uint64_t seed) {
  const PolicyContext context{&sample, std::vector<int>(frames.begin(), frames.end())};
  return policy.sample(context, params, seed);
}

std::string OracleInference::generate(const McqaSample& sample, std::span<const int> frames,
                                      const SamplingParams& /*params*/,
                                      std::uint64_t seed) const {
  const std::vector<double> dist =
      oracle_answer(synthetic_video(sample), frames, sample.n_options());
  std::vector<double> log_probs(dist.size());
  for (std::size_t j = 0; j < dist.size(); ++j) log_probs[j] = std::log(dist[j]);
  std::mt19937_64 rng(seed);
  return render_response("counted the evidence", letter_at(sample_index(log_probs, rng)));
}

std::string UniformInference::generate(const McqaSample& sample, std::span<const int> /*frames*/,
                                       const SamplingParams& /*params*/,
                                       std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  const int pick = std::uniform_int_distribution<int>(0, sample.n_options() - 1)(rng);
  return render_response("guessing", letter_at(pick));
}

EvalMode EvalMode::fixed(int n, int m, SamplingScheduleSpec schedule, FrameSelection selection) {
  EvalMode mode;
  mode.kind = Kind::kFixed;
  mode.n = n;
  mode.m = m;
  mode.tts.schedule = std::move(schedule);
  mode.tts.frame_selection = selection;
  return mode;
}

EvalMode EvalMode::adaptive(TtsConfig config) {
  EvalMode mode;
  mode.kind = Kind::kTts;
  mode.tts = std::move(config);
  return mode;
}

namespace {

void finish(EvalBreakdown& b) {
  if (b.count == 0) return;
  b.accuracy = static_cast<double>(b.correct) / b.count;
  b.mean_frames /= b.count;
  b.mean_generations /= b.count;
}

void add(EvalBreakdown& b, const TtsTrace& trace) {
  ++b.count;
  b.correct += trace.correct() ? 1 : 0;
  b.mean_frames += static_cast<double>(trace.total_frames_processed);
  b.mean_generations += trace.total_generations;
}

}  // namespace

EvalReport summarize(std::span<const TtsTrace> traces) {
  EvalReport report;
  for (const TtsTrace& trace : traces) {
    add(report.overall, trace);
    if (!trace.difficulty.empty()) add(report.by_difficulty[trace.difficulty], trace);
    if (!trace.error.empty()) ++report.n_errors;
  }
  finish(report.overall);
  for (auto& [name, breakdown] : report.by_difficulty) finish(breakdown);
  return report;
}

EvalRun evaluate(const InferenceInterface& inference, std::span<const McqaSample> dataset,
                 const EvalMode& mode, std::uint64_t seed, int jobs) {
  if (dataset.empty()) throw InvalidArgument("evaluate: empty dataset");
  if (mode.kind == EvalMode::Kind::kTts) validate(mode.tts);
  EvalRun run;
  run.traces.resize(dataset.size());
  parallel_for(dataset.size(), jobs, [&](std::size_t i) {
    const McqaSample& sample = dataset[i];
    try {
      run.traces[i] = mode.kind == EvalMode::Kind::kTts
                          ? run_tts(inference, sample, mode.tts, seed)
                          : run_fixed(inference, sample, mode.n, mode.m, seed,
                                      mode.tts.schedule, mode.tts.frame_selection);
    } catch (const TtsAborted& aborted) {
      run.traces[i] = aborted.partial();
    }
  });
  run.report = summarize(run.traces);
  return run;
}

}  // namespace vrts
