#include "vrts/frames.hpp"

#include <algorithm>
#include <string>

#include "vrts/error.hpp"

namespace vrts {

std::vector<int> frame_indices(int total_frames, int n, FrameSelection selection) {
  std::vector<int> out;
  if (total_frames <= 0 || n <= 0) return out;
  const int count = std::min(n, total_frames);
  out.reserve(count);
  if (selection == FrameSelection::kFirstN) {
    for (int k = 0; k < count; ++k) out.push_back(k);
    return out;
  }
  for (int k = 0; k < n; ++k) {
    const int index = static_cast<int>(static_cast<long long>(k) * total_frames / n);
    if (out.empty() || out.back() != index) out.push_back(index);
  }
  return out;
}

FrameSelection parse_frame_selection(std::string_view name) {
  if (name == "uniform") return FrameSelection::kUniform;
  if (name == "first-n" || name == "first_n") return FrameSelection::kFirstN;
  throw InvalidArgument("unknown frame selection '" + std::string(name) + "'");
}

std::string_view to_string(FrameSelection selection) {
  return selection == FrameSelection::kUniform ? "uniform" : "first-n";
}

}  // namespace vrts
