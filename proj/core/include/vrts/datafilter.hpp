#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrts/frames.hpp"
#include "vrts/inference.hpp"
#include "vrts/tts.hpp"
#include "vrts/types.hpp"

namespace vrts {

struct DifficultyRecord {
  std::string sample_id;
  int k = 8;
  int correct = 0;
  int failed = 0;

  double accuracy() const { return k > 0 ? static_cast<double>(correct) / k : 0.0; }
  bool operator==(const DifficultyRecord&) const = default;
};

struct DifficultyOptions {
  int k = 8;
  int frames = 32;  // training budget
  FrameSelection selection = FrameSelection::kUniform;
  SamplingScheduleSpec schedule{};  // rollouts use the round-0 parameters
};

// k rollouts at the training budget; failed rollouts count as incorrect.
DifficultyRecord estimate_difficulty(const InferenceInterface& inference, const McqaSample& sample,
                                     const DifficultyOptions& options, std::uint64_t seed);

// Keeps the samples with 0 < accuracy < 1, in dataset order.
std::vector<McqaSample> filter_dataset(std::span<const DifficultyRecord> records,
                                       std::span<const McqaSample> dataset);

// Round-robin over videos (seeded order inside each video) until `target_size`
// samples are picked. The result keeps the input order.
std::vector<McqaSample> balanced_subsample(std::span<const McqaSample> dataset,
                                           std::size_t target_size, std::uint64_t seed);

std::string difficulty_line(const DifficultyRecord& record);
DifficultyRecord parse_difficulty_line(std::string_view line, std::size_t line_no = 0);
void save_difficulty(std::span<const DifficultyRecord> records, const std::filesystem::path& path);
std::vector<DifficultyRecord> load_difficulty(const std::filesystem::path& path);

}  // namespace vrts
