#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrts/grpo.hpp"
#include "vrts/tts.hpp"

namespace vrts {

std::string trace_line(const TtsTrace& trace);
TtsTrace parse_trace_line(std::string_view line, std::size_t line_no = 0);
void save_traces(std::span<const TtsTrace> traces, const std::filesystem::path& path);
std::vector<TtsTrace> load_traces(const std::filesystem::path& path);

std::string metrics_line(const StepMetrics& metrics);
StepMetrics parse_metrics_line(std::string_view line, std::size_t line_no = 0);
void save_metrics(std::span<const StepMetrics> steps, const std::filesystem::path& path);
std::vector<StepMetrics> load_metrics(const std::filesystem::path& path);

// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

// Calls fn(line, line_no) for every non-blank line.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::size_t stop = end == std::string_view::npos ? text.size() : end;
    ++line_no;
    std::string_view line = text.substr(pos, stop - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) fn(line, line_no);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
}

}  // namespace vrts
