#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vrts/backend.hpp"
#include "vrts/datafilter.hpp"
#include "vrts/grpo.hpp"
#include "vrts/rewards.hpp"
#include "vrts/simenv.hpp"
#include "vrts/toy_policy.hpp"
#include "vrts/tts.hpp"

namespace vrts::cli {

struct InferSettings {
  std::string mode = "tts";  // "tts" or "fixed"
  int frames = 32;           // fixed mode budget
  int votes = 5;             // fixed mode sample count
};

// Everything a command can be configured with. Defaults live here; a JSON
// config file and command-line overrides are layered on top.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "runs/default";
  int jobs = 1;
  // "toy", "backend", "oracle" or "uniform".
  std::string inference = "toy";
  FrameSelection frame_selection = FrameSelection::kUniform;

  CorpusConfig corpus{};
  int n_eval = 400;

  DifficultyOptions filter{};
  int filter_target = 600;

  GrpoConfig grpo{.epochs = 10, .max_steps = 200};
  int train_frames = 32;
  RewardWeights rewards{};

  ToyPolicyShape policy{};
  double init_stddev = 0.01;

  TtsConfig tts{};
  InferSettings infer{};

  // api_key is never part of the echoed config; it comes from VRTS_API_KEY.
  EndpointConfig backend{};
};

using Json = nlohmann::json;

// One "a.b.c" path and the JSON value to put there.
using Override = std::pair<std::string, Json>;

// Parses "path=value"; the value is read as JSON and falls back to a string.
Override parse_set_flag(const std::string& text);

// Defaults, then `file_layer`, then each override in order. Environment
// variables for the backend apply last. Throws ConfigError listing every
// unknown key, wrongly typed value and failed validation at once.
RunConfig resolve_config(const Json& file_layer, const std::vector<Override>& overrides = {});

Json load_config_file(const std::string& path);

// The resolved configuration in canonical form (sorted keys, no secrets).
Json to_json(const RunConfig& config);

// FNV-1a of the canonical dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace vrts::cli
