#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vrts/simenv.hpp"

namespace vrts {

// Fixed-width text table of an EvalReport.
std::string format_report_table(const EvalReport& report, std::string_view title = {});

// Tab-separated, plot-ready rows: group, count, accuracy, mean_frames, mean_generations.
std::string report_series(const EvalReport& report);

struct TraceComparison {
  EvalReport a;
  EvalReport b;
  // b minus a, per group ("overall", then each difficulty present in both).
  struct Delta {
    std::string group;
    double accuracy = 0.0;
    double mean_frames = 0.0;
    double mean_generations = 0.0;
  };
  std::vector<Delta> deltas;
};

TraceComparison compare_traces(std::span<const TtsTrace> a, std::span<const TtsTrace> b);

std::string format_comparison_table(const TraceComparison& comparison, std::string_view label_a,
                                    std::string_view label_b);
std::string comparison_series(const TraceComparison& comparison, std::string_view label_a,
                              std::string_view label_b);

}  // namespace vrts
