#pragma once

#include <string_view>
#include <vector>

namespace vrts {

enum class FrameSelection {
  kUniform,  // index_k = floor(k * total / n)
  kFirstN,   // indices 0..n-1
};

// Returns min(n, total_frames) strictly increasing frame indices.
std::vector<int> frame_indices(int total_frames, int n,
                               FrameSelection selection = FrameSelection::kUniform);

FrameSelection parse_frame_selection(std::string_view name);
std::string_view to_string(FrameSelection selection);

}  // namespace vrts
