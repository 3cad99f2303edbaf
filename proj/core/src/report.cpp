#include "vrts/report.hpp"

#include <fmt/format.h>

namespace vrts {
namespace {

void append_row(std::string& out, std::string_view group, const EvalBreakdown& b) {
  out += fmt::format("{:<10} {:>7} {:>9.4f} {:>12.2f} {:>12.2f}\n", group, b.count, b.accuracy,
                     b.mean_frames, b.mean_generations);
}

}  // namespace

std::string format_report_table(const EvalReport& report, std::string_view title) {
  std::string out;
  if (!title.empty()) out += fmt::format("{}\n", title);
  out += fmt::format("{:<10} {:>7} {:>9} {:>12} {:>12}\n", "group", "count", "accuracy",
                     "mean_frames", "mean_gens");
  append_row(out, "overall", report.overall);
  for (const auto& [name, b] : report.by_difficulty) append_row(out, name, b);
  if (report.n_errors > 0) out += fmt::format("errors: {}\n", report.n_errors);
  return out;
}

std::string report_series(const EvalReport& report) {
  std::string out = "group\tcount\taccuracy\tmean_frames\tmean_generations\n";
  auto row = [&](std::string_view group, const EvalBreakdown& b) {
    out += fmt::format("{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\n", group, b.count, b.accuracy,
                       b.mean_frames, b.mean_generations);
  };
  row("overall", report.overall);
  for (const auto& [name, b] : report.by_difficulty) row(name, b);
  return out;
}

TraceComparison compare_traces(std::span<const TtsTrace> a, std::span<const TtsTrace> b) {
  TraceComparison out;
  out.a = summarize(a);
  out.b = summarize(b);
  auto delta = [](std::string group, const EvalBreakdown& x, const EvalBreakdown& y) {
    return TraceComparison::Delta{std::move(group), y.accuracy - x.accuracy,
                                  y.mean_frames - x.mean_frames,
                                  y.mean_generations - x.mean_generations};
  };
  out.deltas.push_back(delta("overall", out.a.overall, out.b.overall));
  for (const auto& [name, x] : out.a.by_difficulty) {
    const auto it = out.b.by_difficulty.find(name);
    if (it != out.b.by_difficulty.end()) out.deltas.push_back(delta(name, x, it->second));
  }
  return out;
}

std::string format_comparison_table(const TraceComparison& c, std::string_view label_a,
                                    std::string_view label_b) {
  std::string out = fmt::format("A = {}\nB = {}\n", label_a, label_b);
  out += fmt::format("{:<10} {:>8} {:>8} {:>10} {:>10} {:>10} {:>11} {:>11}\n", "group", "acc_A",
                     "acc_B", "acc_delta", "frames_A", "frames_B", "frames_delta", "gens_delta");
  for (const auto& d : c.deltas) {
    const EvalBreakdown& a =
        d.group == "overall" ? c.a.overall : c.a.by_difficulty.at(d.group);
    const EvalBreakdown& b =
        d.group == "overall" ? c.b.overall : c.b.by_difficulty.at(d.group);
    out += fmt::format("{:<10} {:>8.4f} {:>8.4f} {:>+10.4f} {:>10.2f} {:>10.2f} {:>+11.2f} {:>+11.2f}\n",
                       d.group, a.accuracy, b.accuracy, d.accuracy, a.mean_frames, b.mean_frames,
                       d.mean_frames, d.mean_generations);
  }
  return out;
}

std::string comparison_series(const TraceComparison& c, std::string_view label_a,
                              std::string_view label_b) {
  std::string out =
      "group\tlabel_a\tlabel_b\taccuracy_delta\tmean_frames_delta\tmean_generations_delta\n";
  for (const auto& d : c.deltas) {
    out += fmt::format("{}\t{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\n", d.group, label_a, label_b,
                       d.accuracy, d.mean_frames, d.mean_generations);
  }
  return out;
}

}  // namespace vrts
