#include "vrts/types.hpp"

#include <string>

#include "vrts/error.hpp"

namespace vrts {

ConfigError::ConfigError(std::vector<std::string> issues)
    : Error([&] {
        std::string message = "invalid configuration:";
        for (const auto& issue : issues) message += "\n  - " + issue;
        return message;
      }()),
      issues_(std::move(issues)) {}

std::string ExternalVideo::frame_uri(int index) const {
  if (frame_uri_template.empty()) return uri + "#frame=" + std::to_string(index);
  std::string out = frame_uri_template;
  const auto pos = out.find("{}");
  if (pos == std::string::npos) return out;
  out.replace(pos, 2, std::to_string(index));
  return out;
}

std::string video_id(const VideoRef& video) {
  if (const auto* synthetic = std::get_if<SyntheticVideo>(&video)) return synthetic->id;
  return std::get<ExternalVideo>(video).uri;
}

int total_frames(const VideoRef& video) {
  if (const auto* synthetic = std::get_if<SyntheticVideo>(&video)) {
    return synthetic->total_frames();
  }
  return std::get<ExternalVideo>(video).total_frames;
}

void validate(const McqaSample& sample) {
  const int n = sample.n_options();
  if (n < 2 || n > kMaxOptions) {
    throw InvalidArgument("sample " + sample.id + ": option count " + std::to_string(n) +
                          " outside [2, 26]");
  }
  for (int i = 0; i < n; ++i) {
    if (sample.options[i].letter != letter_at(i)) {
      throw InvalidArgument("sample " + sample.id + ": option " + std::to_string(i) +
                            " must be lettered " + std::string(1, letter_at(i)));
    }
  }
  const int gt = letter_index(sample.gt_answer);
  if (gt < 0 || gt >= n) {
    throw InvalidArgument("sample " + sample.id + ": gt_answer is not an option letter");
  }
  if (total_frames(sample.video) <= 0) {
    throw InvalidArgument("sample " + sample.id + ": video has no frames");
  }
}

}  // namespace vrts
