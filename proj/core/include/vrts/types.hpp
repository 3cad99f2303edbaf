#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vrts {

// Option letters are plain uppercase ASCII characters 'A'..'Z'.
using Letter = char;

inline constexpr int kMaxOptions = 26;

inline int letter_index(Letter letter) { return letter - 'A'; }
inline Letter letter_at(int index) { return static_cast<Letter>('A' + index); }

// A procedurally generated video: one evidence label per frame ('\0' = none).
struct SyntheticVideo {
  struct Window {
    int start = 0;
    int width = 0;
    bool operator==(const Window&) const = default;
  };

  std::string id;
  std::vector<Letter> frame_evidence;
  std::optional<Window> evidence_window;

  int total_frames() const { return static_cast<int>(frame_evidence.size()); }
  bool operator==(const SyntheticVideo&) const = default;
};

// A real video referenced by URI. Frame images are produced elsewhere and
// addressed through `frame_uri_template`, where "{}" is replaced by the index.
struct ExternalVideo {
  std::string uri;
  int total_frames = 0;
  std::string frame_uri_template;

  std::string frame_uri(int index) const;
  bool operator==(const ExternalVideo&) const = default;
};

using VideoRef = std::variant<SyntheticVideo, ExternalVideo>;

std::string video_id(const VideoRef& video);
int total_frames(const VideoRef& video);

struct Option {
  Letter letter = 'A';
  std::string text;
  bool operator==(const Option&) const = default;
};

struct McqaSample {
  std::string id;
  VideoRef video;
  std::string question;
  std::vector<Option> options;
  Letter gt_answer = 'A';
  // Free-form difficulty tag ("easy" / "hard" for synthetic corpora).
  std::string difficulty;

  int n_options() const { return static_cast<int>(options.size()); }
  bool operator==(const McqaSample&) const = default;
};

// Throws InvalidArgument when options / gt_answer break the MCQA invariants.
void validate(const McqaSample& sample);

struct ParsedResponse {
  std::optional<std::string> think;
  std::optional<Letter> answer;
  bool well_formed_format = false;
  std::string raw;
};

struct SamplingParams {
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 1024;
  std::string stop_sentinel = "</answer>";

  bool operator==(const SamplingParams&) const = default;
};

struct FrameBudget {
  int n = 32;
  int n_init = 32;
  int n_max = 128;
};

}  // namespace vrts
