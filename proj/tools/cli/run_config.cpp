#include "run_config.hpp"

#include <cstdio>
#include <functional>
#include <set>
#include <stdexcept>
#include <type_traits>

#include "vrts/seed.hpp"
#include "vrts/trace_io.hpp"

namespace vrts::cli {
namespace {

using Millis = std::chrono::milliseconds;

// Strict scalar conversions: 1.5 is not an int and "1" is not a number.
template <typename T>
Json encode(const T& value) {
  return value;
}
Json encode(FrameSelection value) { return std::string(to_string(value)); }
Json encode(OptimizerKind value) { return value == OptimizerKind::kAdam ? "adam" : "sgd"; }
Json encode(Millis value) { return value.count(); }
Json encode(const std::vector<Millis>& value) {
  Json out = Json::array();
  for (const auto& d : value) out.push_back(d.count());
  return out;
}

template <typename T>
void decode(const Json& j, T& out) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw std::invalid_argument("expected true or false");
    out = j.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw std::invalid_argument("expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (j.is_number_unsigned()) {
        out = j.get<T>();
        return;
      }
      if (j.get<std::int64_t>() < 0) throw std::invalid_argument("expected a non-negative integer");
    }
    out = j.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) throw std::invalid_argument("expected a number");
    out = j.get<T>();
  } else {
    static_assert(std::is_same_v<T, std::string>);
    if (!j.is_string()) throw std::invalid_argument("expected a string");
    out = j.get<std::string>();
  }
}
void decode(const Json& j, FrameSelection& out) {
  if (!j.is_string()) throw std::invalid_argument("expected \"uniform\" or \"first-n\"");
  try {
    out = parse_frame_selection(j.get<std::string>());
  } catch (const Error&) {
    throw std::invalid_argument("expected \"uniform\" or \"first-n\"");
  }
}
void decode(const Json& j, OptimizerKind& out) {
  const std::string name = j.is_string() ? j.get<std::string>() : "";
  if (name == "adam") {
    out = OptimizerKind::kAdam;
  } else if (name == "sgd") {
    out = OptimizerKind::kSgd;
  } else {
    throw std::invalid_argument("expected \"adam\" or \"sgd\"");
  }
}
void decode(const Json& j, Millis& out) {
  std::int64_t ms = 0;
  decode(j, ms);
  out = Millis(ms);
}
void decode(const Json& j, std::vector<Millis>& out) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of milliseconds");
  out.clear();
  for (const auto& item : j) {
    Millis d{};
    decode(item, d);
    out.push_back(d);
  }
}

// The single list of configurable fields, shared by the writer and reader.
template <typename V>
void visit(RunConfig& c, V& v) {
  v.field("seed", c.seed);
  v.field("out_dir", c.out_dir);
  v.field("jobs", c.jobs);
  v.field("inference", c.inference);
  v.field("frame_selection", c.frame_selection);
  v.section("corpus", [&] {
    v.field("n_samples", c.corpus.n_samples);
    v.field("n_eval", c.n_eval);
    v.field("n_options", c.corpus.n_options);
    v.field("hard_fraction", c.corpus.hard_fraction);
    v.field("total_frames", c.corpus.total_frames);
    v.field("window_width", c.corpus.window_width);
    v.field("easy_evidence_rate", c.corpus.easy_evidence_rate);
    v.field("distractor_rate", c.corpus.distractor_rate);
  });
  v.section("filter", [&] {
    v.field("k", c.filter.k);
    v.field("frames", c.filter.frames);
    v.field("target_size", c.filter_target);
  });
  v.section("grpo", [&] {
    v.field("group_size", c.grpo.group_size);
    v.field("clip_epsilon", c.grpo.clip_epsilon);
    v.field("kl_beta", c.grpo.kl_beta);
    v.field("learning_rate", c.grpo.learning_rate);
    v.field("batch_size", c.grpo.batch_size);
    v.field("epochs", c.grpo.epochs);
    v.field("max_steps", c.grpo.max_steps);
    v.field("std_floor", c.grpo.std_floor);
    v.field("optimizer", c.grpo.optimizer);
    v.field("train_frames", c.train_frames);
    v.section("rollout", [&] {
      v.field("temperature", c.grpo.rollout_params.temperature);
      v.field("top_p", c.grpo.rollout_params.top_p);
      v.field("max_tokens", c.grpo.rollout_params.max_tokens);
      v.field("stop", c.grpo.rollout_params.stop_sentinel);
    });
  });
  v.section("rewards", [&] {
    v.field("w_format", c.rewards.w_format);
    v.field("w_acc", c.rewards.w_acc);
    v.field("gate_accuracy_on_format", c.rewards.gate_accuracy_on_format);
  });
  v.section("policy", [&] {
    v.field("think_length", c.policy.think_length);
    v.field("feature_scale", c.policy.feature_scale);
    v.field("init_stddev", c.init_stddev);
  });
  v.section("tts", [&] {
    v.field("m", c.tts.m);
    v.field("n_init", c.tts.n_init);
    v.field("n_max", c.tts.n_max);
    v.section("schedule", [&] {
      v.field("base_temperature", c.tts.schedule.base_temperature);
      v.field("temperature_step", c.tts.schedule.temperature_step);
      v.field("base_top_p", c.tts.schedule.base_top_p);
      v.field("top_p_step", c.tts.schedule.top_p_step);
      v.field("min_top_p", c.tts.schedule.min_top_p);
      v.field("max_tokens", c.tts.schedule.max_tokens);
      v.field("stop", c.tts.schedule.stop_sentinel);
    });
  });
  v.section("infer", [&] {
    v.field("mode", c.infer.mode);
    v.field("frames", c.infer.frames);
    v.field("votes", c.infer.votes);
  });
  v.section("backend", [&] {
    v.field("base_url", c.backend.base_url);
    v.field("model_name", c.backend.model_name);
    v.field("timeout_ms", c.backend.timeout);
    v.field("max_retries", c.backend.max_retries);
    v.field("backoff_ms", c.backend.backoff);
  });
}

class Writer {
 public:
  explicit Writer(Json& root) : current_(&root) {}

  template <typename T>
  void field(const char* key, T& value) {
    (*current_)[key] = encode(value);
  }

  void section(const char* key, const std::function<void()>& body) {
    Json* parent = current_;
    current_ = &(*parent)[key];
    *current_ = Json::object();
    body();
    current_ = parent;
  }

 private:
  Json* current_;
};

class Reader {
 public:
  Reader(const Json& root, std::vector<std::string>& issues) : issues_(issues) {
    frames_.push_back({&root, ""});
  }

  template <typename T>
  void field(const char* key, T& value) {
    Frame& frame = frames_.back();
    frame.seen.insert(key);
    if (!frame.node || !frame.node->is_object()) return;
    const auto it = frame.node->find(key);
    if (it == frame.node->end()) return;
    try {
      decode(*it, value);
    } catch (const std::exception& e) {
      issues_.push_back(frame.prefix + key + ": " + e.what());
    }
  }

  void section(const char* key, const std::function<void()>& body) {
    Frame& frame = frames_.back();
    frame.seen.insert(key);
    const Json* child = nullptr;
    if (frame.node && frame.node->is_object()) {
      const auto it = frame.node->find(key);
      if (it != frame.node->end()) {
        if (it->is_object()) {
          child = &*it;
        } else {
          issues_.push_back(frame.prefix + key + ": expected an object");
        }
      }
    }
    frames_.push_back({child, frame.prefix + key + "."});
    body();
    report_unknown();
    frames_.pop_back();
  }

  void finish() { report_unknown(); }

 private:
  struct Frame {
    const Json* node;
    std::string prefix;
    std::set<std::string> seen;
  };

  void report_unknown() {
    const Frame& frame = frames_.back();
    if (!frame.node || !frame.node->is_object()) return;
    for (const auto& [key, value] : frame.node->items()) {
      if (!frame.seen.count(key)) issues_.push_back(frame.prefix + key + ": unknown field");
    }
  }

  std::vector<std::string>& issues_;
  std::vector<Frame> frames_;
};

void set_path(Json& root, const std::string& path, const Json& value) {
  Json* node = &root;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot == std::string::npos ? dot : dot - begin);
    if (key.empty()) throw ConfigError({"'" + path + "': empty path component"});
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    begin = dot + 1;
  }
}

template <typename Fn>
void collect(std::vector<std::string>& issues, const std::string& section, Fn&& check) {
  try {
    check();
  } catch (const ConfigError& e) {
    for (const auto& issue : e.issues()) {
      issues.push_back(issue.rfind(section, 0) == 0 ? issue : section + ": " + issue);
    }
  } catch (const Error& e) {
    issues.push_back(section + ": " + e.what());
  }
}

}  // namespace

Override parse_set_flag(const std::string& text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError({"--set '" + text + "': expected path=value"});
  }
  const std::string raw = text.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  return {text.substr(0, eq), std::move(value)};
}

Json to_json(const RunConfig& config) {
  Json root = Json::object();
  Writer writer(root);
  RunConfig copy = config;
  visit(copy, writer);
  return root;
}

RunConfig resolve_config(const Json& file_layer, const std::vector<Override>& overrides) {
  std::vector<std::string> issues;
  Json layered = file_layer.is_null() ? Json::object() : file_layer;
  if (!layered.is_object()) throw ConfigError({"config: expected a JSON object at the top level"});
  for (const auto& [path, value] : overrides) set_path(layered, path, value);

  RunConfig config;
  Reader reader(layered, issues);
  visit(config, reader);
  reader.finish();

  config.backend.apply_environment();
  config.corpus.n_init = config.tts.n_init;
  config.corpus.n_max = config.tts.n_max;
  config.policy.n_options = config.corpus.n_options;
  config.filter.selection = config.frame_selection;
  config.filter.schedule = config.tts.schedule;
  config.tts.frame_selection = config.frame_selection;

  if (config.jobs < 1) issues.push_back("jobs: must be >= 1");
  if (config.inference != "toy" && config.inference != "backend" &&
      config.inference != "oracle" && config.inference != "uniform") {
    issues.push_back("inference: expected toy, backend, oracle or uniform");
  }
  if (config.n_eval < 1) issues.push_back("corpus.n_eval: must be >= 1");
  if (config.filter.k < 1) issues.push_back("filter.k: must be >= 1");
  if (config.filter.frames < 1) issues.push_back("filter.frames: must be >= 1");
  if (config.filter_target < 0) issues.push_back("filter.target_size: must be >= 0");
  if (config.train_frames < 1) issues.push_back("grpo.train_frames: must be >= 1");
  if (config.policy.think_length < 1) issues.push_back("policy.think_length: must be >= 1");
  if (!(config.policy.feature_scale > 0.0)) issues.push_back("policy.feature_scale: must be > 0");
  if (!(config.init_stddev >= 0.0)) issues.push_back("policy.init_stddev: must be >= 0");
  if (config.infer.mode != "tts" && config.infer.mode != "fixed") {
    issues.push_back("infer.mode: expected tts or fixed");
  }
  if (config.infer.frames < 1) issues.push_back("infer.frames: must be >= 1");
  if (config.infer.votes < 1) issues.push_back("infer.votes: must be >= 1");
  if (config.out_dir.empty()) issues.push_back("out_dir: must not be empty");

  collect(issues, "corpus", [&] { validate(config.corpus); });
  collect(issues, "grpo", [&] { validate(config.grpo); });
  collect(issues, "rewards", [&] { validate(config.rewards); });
  collect(issues, "tts", [&] { validate(config.tts); });
  collect(issues, "backend", [&] { validate(config.backend); });

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return config;
}

Json load_config_file(const std::string& path) {
  const std::string text = read_file(path);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("config file " + path + " is not valid JSON");
  return j;
}

std::string config_hash(const RunConfig& config) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(config).dump())));
  return buffer;
}

}  // namespace vrts::cli
