#include "vrts/dataset.hpp"

#include <unordered_set>

#include "json_util.hpp"
#include "vrts/trace_io.hpp"

namespace vrts {
namespace {

using detail::json;

json video_to_json(const VideoRef& video) {
  json out;
  if (const auto* synthetic = std::get_if<SyntheticVideo>(&video)) {
    out["kind"] = "synthetic";
    out["id"] = synthetic->id;
    out["total_frames"] = synthetic->total_frames();
    json evidence = json::array();
    for (const Letter label : synthetic->frame_evidence) {
      if (label == '\0') {
        evidence.push_back(nullptr);
      } else {
        evidence.push_back(std::string(1, label));
      }
    }
    out["evidence"] = std::move(evidence);
    if (synthetic->evidence_window) {
      out["evidence_window"] = {{"start", synthetic->evidence_window->start},
                                {"width", synthetic->evidence_window->width}};
    }
    return out;
  }
  const auto& external = std::get<ExternalVideo>(video);
  out["kind"] = "external";
  out["uri"] = external.uri;
  out["total_frames"] = external.total_frames;
  if (!external.frame_uri_template.empty()) out["frame_uri_template"] = external.frame_uri_template;
  return out;
}

VideoRef video_from_json(const json& video, std::size_t line_no) {
  const auto kind = detail::require_as<std::string>(video, "kind", line_no);
  const int total = detail::require_as<int>(video, "total_frames", line_no);
  if (total <= 0) throw FormatError("video.total_frames must be positive", line_no, "total_frames");
  if (kind == "synthetic") {
    SyntheticVideo out;
    out.id = detail::require_as<std::string>(video, "id", line_no);
    const json& evidence = detail::require(video, "evidence", line_no);
    if (!evidence.is_array() || static_cast<int>(evidence.size()) != total) {
      throw FormatError("video.evidence must hold total_frames entries", line_no, "evidence");
    }
    out.frame_evidence.reserve(evidence.size());
    for (const auto& label : evidence) {
      if (label.is_null()) {
        out.frame_evidence.push_back('\0');
      } else if (label.is_string() && label.get<std::string>().size() == 1 &&
                 label.get<std::string>()[0] >= 'A' && label.get<std::string>()[0] <= 'Z') {
        out.frame_evidence.push_back(label.get<std::string>()[0]);
      } else {
        throw FormatError("video.evidence entries must be null or one letter", line_no,
                          "evidence");
      }
    }
    if (const auto it = video.find("evidence_window"); it != video.end() && !it->is_null()) {
      out.evidence_window = SyntheticVideo::Window{
          detail::require_as<int>(*it, "start", line_no),
          detail::require_as<int>(*it, "width", line_no)};
    }
    return out;
  }
  if (kind == "external") {
    ExternalVideo out;
    out.uri = detail::require_as<std::string>(video, "uri", line_no);
    out.total_frames = total;
    out.frame_uri_template =
        detail::optional_as<std::string>(video, "frame_uri_template", "", line_no);
    return out;
  }
  throw FormatError("video.kind must be 'synthetic' or 'external'", line_no, "kind");
}

}  // namespace

std::string dataset_line(const McqaSample& sample) {
  json out;
  out["id"] = sample.id;
  out["video"] = video_to_json(sample.video);
  out["question"] = sample.question;
  json options = json::array();
  for (const auto& option : sample.options) {
    options.push_back({{"letter", std::string(1, option.letter)}, {"text", option.text}});
  }
  out["options"] = std::move(options);
  out["gt_answer"] = std::string(1, sample.gt_answer);
  if (!sample.difficulty.empty()) out["difficulty"] = sample.difficulty;
  return out.dump();
}

McqaSample parse_dataset_line(std::string_view line, std::size_t line_no) {
  const json record = detail::parse_json_line(line, line_no);
  McqaSample sample;
  sample.id = detail::require_as<std::string>(record, "id", line_no);
  sample.video = video_from_json(detail::require(record, "video", line_no), line_no);
  sample.question = detail::require_as<std::string>(record, "question", line_no);
  const json& options = detail::require(record, "options", line_no);
  if (!options.is_array()) throw FormatError("field 'options' must be an array", line_no, "options");
  for (const auto& option : options) {
    sample.options.push_back(
        {detail::require_letter(option, "letter", line_no),
         detail::require_as<std::string>(option, "text", line_no)});
  }
  sample.gt_answer = detail::require_letter(record, "gt_answer", line_no);
  sample.difficulty = detail::optional_as<std::string>(record, "difficulty", "", line_no);
  try {
    validate(sample);
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    throw FormatError(what, line_no,
                      what.find("gt_answer") != std::string::npos ? "gt_answer" : "options");
  }
  return sample;
}

std::vector<McqaSample> parse_dataset(std::string_view text) {
  std::vector<McqaSample> out;
  std::unordered_set<std::string> seen;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    McqaSample sample = parse_dataset_line(line, line_no);
    if (!seen.insert(sample.id).second) {
      throw FormatError("duplicate sample id '" + sample.id + "'", line_no, "id");
    }
    out.push_back(std::move(sample));
  });
  return out;
}

std::string serialize_dataset(std::span<const McqaSample> samples) {
  std::string out;
  for (const auto& sample : samples) {
    out += dataset_line(sample);
    out += '\n';
  }
  return out;
}

std::vector<McqaSample> load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path));
}

void save_dataset(std::span<const McqaSample> samples, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_dataset(samples));
}

}  // namespace vrts
