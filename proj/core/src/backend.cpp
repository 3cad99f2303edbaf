#include "vrts/backend.hpp"

#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json_util.hpp"
#include "vrts/response.hpp"

namespace vrts {
namespace {

using detail::json;

constexpr std::string_view kPreamble =
    "A conversation between User and Assistant. The user asks a question, and the Assistant "
    "solves it. The assistant first thinks about the reasoning process in the mind and then "
    "provides the user with the answer. The reasoning process and answer are enclosed within "
    "<think> </think> and <answer> </answer> tags, respectively, i.e., <think> reasoning "
    "process here </think><answer> answer here </answer>.";

constexpr std::string_view kInstruction =
    "Please provide only the single option letter (e.g., A, B, C, D, etc.) within the "
    "<answer> </answer> tags.";

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

std::optional<ParsedUrl> parse_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") return std::nullopt;
  const auto host_begin = scheme_end + 3;
  const auto path_begin = url.find('/', host_begin);
  ParsedUrl out;
  out.scheme_host_port = url.substr(0, path_begin);
  if (out.scheme_host_port.size() <= host_begin) return std::nullopt;
  if (path_begin != std::string::npos) out.path_prefix = url.substr(path_begin);
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  return out;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

// Servers strip the stop string from the content. When the output ends inside
// the block the stop string closes, put it back so the response parses.
std::string finish_text(std::string text, const std::string& finish_reason,
                        const std::string& sentinel) {
  if (sentinel.empty()) return text;
  const auto hit = text.find(sentinel);
  if (hit != std::string::npos) {
    text.resize(hit + sentinel.size());
    return text;
  }
  if (finish_reason != "stop" || sentinel.rfind("</", 0) != 0) return text;
  const std::string open = "<" + sentinel.substr(2);
  if (text.rfind(open) != std::string::npos) text += sentinel;
  return text;
}

}  // namespace

void EndpointConfig::apply_environment() {
  if (const char* v = std::getenv("VRTS_API_BASE"); v && *v) base_url = v;
  if (const char* v = std::getenv("VRTS_API_KEY"); v && *v) api_key = v;
  if (const char* v = std::getenv("VRTS_MODEL"); v && *v) model_name = v;
}

std::vector<std::string> validation_issues(const EndpointConfig& config) {
  std::vector<std::string> issues;
  if (!parse_base_url(config.base_url)) {
    issues.push_back("base_url: expected http://host[:port][/prefix] or https://...");
  }
  if (config.model_name.empty()) issues.push_back("model_name: must not be empty");
  if (config.timeout.count() <= 0) issues.push_back("timeout: must be positive");
  if (config.max_retries < 0) issues.push_back("max_retries: must be >= 0");
  if (config.backoff.empty()) issues.push_back("backoff: must list at least one delay");
  for (const auto& d : config.backoff) {
    if (d.count() < 0) {
      issues.push_back("backoff: delays must be >= 0");
      break;
    }
  }
  return issues;
}

void validate(const EndpointConfig& config) {
  auto issues = validation_issues(config);
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::string PromptPayload::text(std::string_view video_placeholder) const {
  return before_video + std::string(video_placeholder) + after_video;
}

PromptPayload build_prompt(const McqaSample& sample) {
  PromptPayload prompt;
  prompt.before_video = std::string(kPreamble) + "\nVideo: ";
  std::string options;
  for (const Option& o : sample.options) {
    if (!options.empty()) options += ' ';
    options += fmt::format("{}: {}.", o.letter, o.text);
  }
  prompt.after_video =
      fmt::format("\nQuestion: {}\nOptions: {}\n{}", sample.question, options, kInstruction);
  return prompt;
}

std::vector<std::string> frame_references(const McqaSample& sample, std::span<const int> frames) {
  std::vector<std::string> refs;
  refs.reserve(frames.size());
  if (const auto* ext = std::get_if<ExternalVideo>(&sample.video)) {
    for (int k : frames) refs.push_back(ext->frame_uri(k));
  } else {
    const std::string& id = std::get<SyntheticVideo>(sample.video).id;
    for (int k : frames) refs.push_back(fmt::format("synthetic://{}/{}", id, k));
  }
  return refs;
}

ChatClient::ChatClient(EndpointConfig config) : config_(std::move(config)) {
  validate(config_);
  const auto url = parse_base_url(config_.base_url);
  host_ = url->scheme_host_port;
  path_prefix_ = url->path_prefix;
}

std::string ChatClient::request_body(const PromptPayload& prompt,
                                     std::span<const std::string> frame_refs,
                                     const SamplingParams& params,
                                     std::optional<std::uint64_t> seed) const {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", prompt.before_video}});
  for (const auto& ref : frame_refs) {
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", ref}}}});
  }
  content.push_back({{"type", "text"}, {"text", prompt.after_video}});
  json body;
  body["model"] = config_.model_name;
  body["messages"] = json::array({{{"role", "user"}, {"content", std::move(content)}}});
  body["temperature"] = params.temperature;
  body["top_p"] = params.top_p;
  body["max_tokens"] = params.max_tokens;
  if (!params.stop_sentinel.empty()) body["stop"] = json::array({params.stop_sentinel});
  // Many servers take a signed 64-bit seed.
  if (seed) body["seed"] = static_cast<std::int64_t>(*seed >> 1);
  return body.dump();
}

ChatResult ChatClient::generate(const PromptPayload& prompt,
                                std::span<const std::string> frame_refs,
                                const SamplingParams& params,
                                std::optional<std::uint64_t> seed) const {
  const std::string body = request_body(prompt, frame_refs, params, seed);
  const std::string path = path_prefix_ + "/chat/completions";
  const int max_attempts = 1 + config_.max_retries;
  std::string last_error;
  int last_status = 0;

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) {
      const auto k = std::min<std::size_t>(attempt - 2, config_.backoff.size() - 1);
      std::this_thread::sleep_for(config_.backoff[k]);
    }
    httplib::Client client(host_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_status = 0;
      last_error = httplib::to_string(res.error());
      spdlog::debug("chat request attempt {}/{} failed: {}", attempt, max_attempts, last_error);
      continue;
    }
    last_status = res->status;
    if (res->status != 200) {
      if (!retryable_status(res->status)) {
        throw EndpointConfigError(
            fmt::format("endpoint rejected the request with HTTP {}: {}", res->status,
                        res->body.substr(0, 512)),
            res->status);
      }
      last_error = fmt::format("HTTP {}", res->status);
      spdlog::debug("chat request attempt {}/{} got {}", attempt, max_attempts, last_error);
      continue;
    }

    ChatResult result;
    try {
      const json reply = json::parse(res->body);
      const json& choice = reply.at("choices").at(0);
      const json& message = choice.at("message");
      if (message.contains("content") && message["content"].is_string()) {
        result.text = message["content"].get<std::string>();
      }
      if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
        result.finish_reason = choice["finish_reason"].get<std::string>();
      }
    } catch (const json::exception& e) {
      last_error = std::string("malformed response body: ") + e.what();
      spdlog::debug("chat request attempt {}/{}: {}", attempt, max_attempts, last_error);
      continue;
    }
    result.text = finish_text(std::move(result.text), result.finish_reason, params.stop_sentinel);
    result.attempts = attempt;
    return result;
  }
  throw TransportError(
      fmt::format("chat request failed after {} attempts: {}", max_attempts, last_error),
      max_attempts, last_status);
}

std::string BackendInference::generate(const McqaSample& sample, std::span<const int> frames,
                                       const SamplingParams& params, std::uint64_t seed) const {
  const auto refs = frame_references(sample, frames);
  return client_.generate(build_prompt(sample), refs, params, seed).text;
}

}  // namespace vrts
