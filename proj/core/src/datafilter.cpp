#include "vrts/datafilter.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "json_util.hpp"
#include "vrts/response.hpp"
#include "vrts/rewards.hpp"
#include "vrts/seed.hpp"
#include "vrts/trace_io.hpp"

namespace vrts {

DifficultyRecord estimate_difficulty(const InferenceInterface& inference, const McqaSample& sample,
                                     const DifficultyOptions& options, std::uint64_t seed) {
  if (options.k < 1) throw InvalidArgument("estimate_difficulty: k must be >= 1");
  DifficultyRecord record;
  record.sample_id = sample.id;
  record.k = options.k;
  const std::vector<int> frames =
      frame_indices(total_frames(sample.video), options.frames, options.selection);
  const SamplingParams params = sampling_schedule(0, options.schedule);
  for (int i = 0; i < options.k; ++i) {
    try {
      const std::string raw = inference.generate(
          sample, frames, params, derive_seed(seed, sample.id, static_cast<std::uint64_t>(i)));
      record.correct += static_cast<int>(
          accuracy_reward(parse_response(raw, sample.n_options()), sample.gt_answer));
    } catch (const TransportError& e) {
      ++record.failed;
      spdlog::warn("difficulty rollout {} for {} failed after {} attempts: {}", i, sample.id,
                   e.attempts(), e.what());
    }
  }
  return record;
}

std::vector<McqaSample> filter_dataset(std::span<const DifficultyRecord> records,
                                       std::span<const McqaSample> dataset) {
  std::unordered_map<std::string, const DifficultyRecord*> by_id;
  for (const auto& record : records) by_id[record.sample_id] = &record;
  std::vector<McqaSample> out;
  for (const auto& sample : dataset) {
    const auto it = by_id.find(sample.id);
    if (it == by_id.end()) {
      throw InvalidArgument("filter_dataset: no difficulty record for sample '" + sample.id + "'");
    }
    const DifficultyRecord& r = *it->second;
    if (r.correct > 0 && r.correct < r.k) out.push_back(sample);
  }
  if (out.empty()) {
    spdlog::warn("filter_dataset: every sample was solved always or never; result is empty");
  }
  return out;
}

std::vector<McqaSample> balanced_subsample(std::span<const McqaSample> dataset,
                                           std::size_t target_size, std::uint64_t seed) {
  if (target_size > dataset.size()) {
    throw InvalidArgument("balanced_subsample: target " + std::to_string(target_size) +
                          " exceeds dataset size " + std::to_string(dataset.size()));
  }
  // Groups in first-appearance order.
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const std::string vid = video_id(dataset[i].video);
    const auto [it, inserted] = group_of.try_emplace(vid, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  std::mt19937_64 rng(derive_seed(seed, "balanced_subsample"));
  for (auto& group : groups) std::shuffle(group.begin(), group.end(), rng);
  std::vector<std::size_t> visit(groups.size());
  std::iota(visit.begin(), visit.end(), 0);
  std::shuffle(visit.begin(), visit.end(), rng);

  std::vector<bool> chosen(dataset.size(), false);
  std::size_t picked = 0;
  for (std::size_t depth = 0; picked < target_size; ++depth) {
    for (const std::size_t g : visit) {
      if (picked == target_size) break;
      if (depth < groups[g].size()) {
        chosen[groups[g][depth]] = true;
        ++picked;
      }
    }
  }
  std::vector<McqaSample> out;
  out.reserve(target_size);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (chosen[i]) out.push_back(dataset[i]);
  }
  return out;
}

std::string difficulty_line(const DifficultyRecord& record) {
  detail::json out;
  out["id"] = record.sample_id;
  out["k"] = record.k;
  out["correct"] = record.correct;
  out["failed"] = record.failed;
  out["accuracy"] = record.accuracy();
  return out.dump();
}

DifficultyRecord parse_difficulty_line(std::string_view line, std::size_t line_no) {
  const auto j = detail::parse_json_line(line, line_no);
  DifficultyRecord record;
  record.sample_id = detail::require_as<std::string>(j, "id", line_no);
  record.k = detail::require_as<int>(j, "k", line_no);
  record.correct = detail::require_as<int>(j, "correct", line_no);
  record.failed = detail::optional_as<int>(j, "failed", 0, line_no);
  if (record.k < 1 || record.correct < 0 || record.correct > record.k) {
    throw FormatError("difficulty record needs 0 <= correct <= k and k >= 1", line_no, "correct");
  }
  return record;
}

void save_difficulty(std::span<const DifficultyRecord> records, const std::filesystem::path& path) {
  std::string text;
  for (const auto& r : records) text += difficulty_line(r) + "\n";
  write_file_atomic(path, text);
}

std::vector<DifficultyRecord> load_difficulty(const std::filesystem::path& path) {
  std::vector<DifficultyRecord> out;
  for_each_line(read_file(path), [&](std::string_view line, std::size_t line_no) {
    out.push_back(parse_difficulty_line(line, line_no));
  });
  return out;
}

}  // namespace vrts
