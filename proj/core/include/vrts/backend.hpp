#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrts/inference.hpp"
#include "vrts/types.hpp"

namespace vrts {

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string api_key;
  std::string model_name = "video-rts";
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  // Delay before retry k is backoff[min(k, size-1)].
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(500),
                                                 std::chrono::milliseconds(1000),
                                                 std::chrono::milliseconds(2000),
                                                 std::chrono::milliseconds(4000)};

  // VRTS_API_BASE, VRTS_API_KEY and VRTS_MODEL override the fields they name.
  void apply_environment();
};

// Returns the list of problems (empty when valid).
std::vector<std::string> validation_issues(const EndpointConfig& config);
void validate(const EndpointConfig& config);

// The user prompt, split around the spot where video frames go.
struct PromptPayload {
  std::string before_video;
  std::string after_video;

  std::string text(std::string_view video_placeholder = "<video>") const;
  bool operator==(const PromptPayload&) const = default;
};

PromptPayload build_prompt(const McqaSample& sample);

// Frame references handed to the endpoint, one per index.
std::vector<std::string> frame_references(const McqaSample& sample, std::span<const int> frames);

struct ChatResult {
  std::string text;
  std::string finish_reason;
  int attempts = 0;
};

// Chat-completions client. Thread-safe: each call uses its own connection.
class ChatClient {
 public:
  explicit ChatClient(EndpointConfig config);

  std::string request_body(const PromptPayload& prompt, std::span<const std::string> frame_refs,
                           const SamplingParams& params,
                           std::optional<std::uint64_t> seed = std::nullopt) const;

  // Retries timeouts, connection failures, 429 and 5xx with backoff; other
  // 4xx statuses throw EndpointConfigError at once. Output is cut after the
  // stop sentinel, and a sentinel swallowed by the server is restored.
  ChatResult generate(const PromptPayload& prompt, std::span<const std::string> frame_refs,
                      const SamplingParams& params,
                      std::optional<std::uint64_t> seed = std::nullopt) const;

  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
  std::string host_;
  std::string path_prefix_;
};

class BackendInference final : public InferenceInterface {
 public:
  explicit BackendInference(EndpointConfig config) : client_(std::move(config)) {}

  std::string generate(const McqaSample& sample, std::span<const int> frames,
                       const SamplingParams& params, std::uint64_t seed) const override;

  const ChatClient& client() const { return client_; }

 private:
  ChatClient client_;
};

}  // namespace vrts
