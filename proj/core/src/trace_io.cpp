#include "vrts/trace_io.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace vrts {
namespace {

using detail::json;

json letter_or_null(const std::optional<Letter>& letter) {
  return letter ? json(std::string(1, *letter)) : json(nullptr);
}

std::optional<Letter> parse_optional_letter(const json& object, const char* field,
                                            std::size_t line_no) {
  const auto it = object.find(field);
  if (it == object.end() || it->is_null()) return std::nullopt;
  return detail::require_letter(object, field, line_no);
}

}  // namespace

std::string trace_line(const TtsTrace& trace) {
  json out;
  out["sample_id"] = trace.sample_id;
  out["gt_answer"] = std::string(1, trace.gt_answer);
  if (!trace.difficulty.empty()) out["difficulty"] = trace.difficulty;
  out["final_answer"] = letter_or_null(trace.final_answer);
  out["decided_by"] = std::string(to_string(trace.decided_by));
  out["total_frames_processed"] = trace.total_frames_processed;
  out["total_generations"] = trace.total_generations;
  if (!trace.error.empty()) out["error"] = trace.error;
  json rounds = json::array();
  for (const RoundRecord& round : trace.rounds) {
    json samples = json::array();
    for (const SampleRecord& s : round.samples) {
      samples.push_back({{"temperature", s.params.temperature},
                         {"top_p", s.params.top_p},
                         {"max_tokens", s.params.max_tokens},
                         {"stop", s.params.stop_sentinel},
                         {"raw", s.raw},
                         {"answer", letter_or_null(s.answer)}});
    }
    rounds.push_back({{"budget", round.budget},
                      {"frames", round.frames},
                      {"consensus", round.consensus},
                      {"samples", std::move(samples)}});
  }
  out["rounds"] = std::move(rounds);
  return out.dump();
}

TtsTrace parse_trace_line(std::string_view line, std::size_t line_no) {
  const json j = detail::parse_json_line(line, line_no);
  TtsTrace trace;
  trace.sample_id = detail::require_as<std::string>(j, "sample_id", line_no);
  trace.gt_answer = detail::require_letter(j, "gt_answer", line_no);
  trace.difficulty = detail::optional_as<std::string>(j, "difficulty", "", line_no);
  trace.final_answer = parse_optional_letter(j, "final_answer", line_no);
  try {
    trace.decided_by = parse_decided_by(detail::require_as<std::string>(j, "decided_by", line_no));
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what(), line_no, "decided_by");
  }
  trace.total_frames_processed = detail::require_as<long>(j, "total_frames_processed", line_no);
  trace.total_generations = detail::require_as<int>(j, "total_generations", line_no);
  trace.error = detail::optional_as<std::string>(j, "error", "", line_no);
  const json& rounds = detail::require(j, "rounds", line_no);
  if (!rounds.is_array()) throw FormatError("field 'rounds' must be an array", line_no, "rounds");
  for (const json& r : rounds) {
    RoundRecord round;
    round.budget = detail::require_as<int>(r, "budget", line_no);
    round.frames = detail::require_as<std::vector<int>>(r, "frames", line_no);
    round.consensus = detail::require_as<bool>(r, "consensus", line_no);
    for (const json& s : detail::require(r, "samples", line_no)) {
      SampleRecord sample;
      sample.params.temperature = detail::require_as<double>(s, "temperature", line_no);
      sample.params.top_p = detail::require_as<double>(s, "top_p", line_no);
      sample.params.max_tokens = detail::require_as<int>(s, "max_tokens", line_no);
      sample.params.stop_sentinel = detail::require_as<std::string>(s, "stop", line_no);
      sample.raw = detail::require_as<std::string>(s, "raw", line_no);
      sample.answer = parse_optional_letter(s, "answer", line_no);
      round.samples.push_back(std::move(sample));
    }
    trace.rounds.push_back(std::move(round));
  }
  return trace;
}

void save_traces(std::span<const TtsTrace> traces, const std::filesystem::path& path) {
  std::string text;
  for (const auto& trace : traces) text += trace_line(trace) + "\n";
  write_file_atomic(path, text);
}

std::vector<TtsTrace> load_traces(const std::filesystem::path& path) {
  std::vector<TtsTrace> out;
  for_each_line(read_file(path), [&](std::string_view line, std::size_t line_no) {
    out.push_back(parse_trace_line(line, line_no));
  });
  return out;
}

std::string metrics_line(const StepMetrics& m) {
  json out;
  out["step"] = m.step;
  out["n_groups"] = m.n_groups;
  out["n_degenerate"] = m.n_degenerate;
  out["n_failed"] = m.n_failed;
  out["mean_reward"] = m.mean_reward;
  out["mean_accuracy_reward"] = m.mean_accuracy_reward;
  out["mean_format_reward"] = m.mean_format_reward;
  out["objective"] = m.objective;
  out["grad_norm"] = m.grad_norm;
  out["mean_kl"] = m.mean_kl;
  out["mean_ratio"] = m.mean_ratio;
  out["clip_fraction"] = m.clip_fraction;
  out["updated"] = m.updated;
  return out.dump();
}

StepMetrics parse_metrics_line(std::string_view line, std::size_t line_no) {
  const json j = detail::parse_json_line(line, line_no);
  StepMetrics m;
  m.step = detail::require_as<int>(j, "step", line_no);
  m.n_groups = detail::require_as<int>(j, "n_groups", line_no);
  m.n_degenerate = detail::require_as<int>(j, "n_degenerate", line_no);
  m.n_failed = detail::require_as<int>(j, "n_failed", line_no);
  m.mean_reward = detail::require_as<double>(j, "mean_reward", line_no);
  m.mean_accuracy_reward = detail::require_as<double>(j, "mean_accuracy_reward", line_no);
  m.mean_format_reward = detail::require_as<double>(j, "mean_format_reward", line_no);
  m.objective = detail::require_as<double>(j, "objective", line_no);
  m.grad_norm = detail::require_as<double>(j, "grad_norm", line_no);
  m.mean_kl = detail::require_as<double>(j, "mean_kl", line_no);
  m.mean_ratio = detail::require_as<double>(j, "mean_ratio", line_no);
  m.clip_fraction = detail::require_as<double>(j, "clip_fraction", line_no);
  m.updated = detail::require_as<bool>(j, "updated", line_no);
  return m;
}

void save_metrics(std::span<const StepMetrics> steps, const std::filesystem::path& path) {
  std::string text;
  for (const auto& m : steps) text += metrics_line(m) + "\n";
  write_file_atomic(path, text);
}

std::vector<StepMetrics> load_metrics(const std::filesystem::path& path) {
  std::vector<StepMetrics> out;
  for_each_line(read_file(path), [&](std::string_view line, std::size_t line_no) {
    out.push_back(parse_metrics_line(line, line_no));
  });
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace vrts
