#include "vrts/toy_policy.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "json_util.hpp"
#include "vrts/error.hpp"
#include "vrts/response.hpp"
#include "vrts/sampling.hpp"

namespace vrts {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr const char* kCheckpointFormat = "vrts-toy-policy";
constexpr int kCheckpointVersion = 1;

void check_shape(const ToyPolicyShape& shape) {
  std::vector<std::string> issues;
  if (shape.n_options < 2 || shape.n_options > kMaxOptions) {
    issues.push_back("policy.n_options must lie in [2, 26]");
  }
  if (shape.think_length < 1) issues.push_back("policy.think_length must be >= 1");
  if (!(shape.feature_scale > 0.0)) issues.push_back("policy.feature_scale must be > 0");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

}  // namespace

ToyPolicy::ToyPolicy(ToyPolicyShape shape, std::vector<double> parameters)
    : shape_(shape), params_(std::move(parameters)) {
  check_shape(shape_);
  if (params_.size() != parameter_count(shape_)) {
    throw InvalidArgument("toy policy expects " + std::to_string(parameter_count(shape_)) +
                          " parameters, got " + std::to_string(params_.size()));
  }
}

std::size_t ToyPolicy::parameter_count(const ToyPolicyShape& shape) {
  const auto k = static_cast<std::size_t>(shape.n_options);
  return (k + (k + 1)) * (k + 1);
}

ToyPolicy ToyPolicy::zeros(ToyPolicyShape shape) {
  check_shape(shape);
  return ToyPolicy(shape, std::vector<double>(parameter_count(shape), 0.0));
}

ToyPolicy ToyPolicy::random(ToyPolicyShape shape, std::uint64_t seed, double stddev) {
  check_shape(shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  std::vector<double> params(parameter_count(shape));
  for (double& p : params) p = normal(rng);
  return ToyPolicy(shape, std::move(params));
}

void ToyPolicy::set_parameters(std::span<const double> values) {
  if (values.size() != params_.size()) throw InvalidArgument("toy policy: parameter size mismatch");
  params_.assign(values.begin(), values.end());
}

std::unique_ptr<Policy> ToyPolicy::snapshot() const { return std::make_unique<ToyPolicy>(*this); }

std::vector<double> ToyPolicy::features(const PolicyContext& context) const {
  if (context.sample == nullptr) throw InvalidArgument("toy policy: context without a sample");
  const auto* video = std::get_if<SyntheticVideo>(&context.sample->video);
  if (video == nullptr) throw InvalidArgument("toy policy needs a synthetic video");
  const int k = shape_.n_options;
  std::vector<double> f(feature_dim(), 0.0);
  for (const int index : context.frames) {
    if (index < 0 || index >= video->total_frames()) {
      throw InvalidArgument("toy policy: frame index out of range");
    }
    const Letter label = video->frame_evidence[index];
    if (label == '\0') continue;
    const int option = letter_index(label);
    if (option >= 0 && option < k) f[option] += 1.0;
  }
  if (!context.frames.empty()) {
    const double scale = shape_.feature_scale / static_cast<double>(context.frames.size());
    for (int j = 0; j < k; ++j) f[j] *= scale;
  }
  f[k] = 1.0;
  return f;
}

namespace {

std::vector<double> linear_head(std::span<const double> weights, int rows,
                                std::span<const double> f) {
  const std::size_t d = f.size();
  std::vector<double> out(rows, 0.0);
  for (int j = 0; j < rows; ++j) {
    double z = 0.0;
    for (std::size_t c = 0; c < d; ++c) z += weights[j * d + c] * f[c];
    out[j] = z;
  }
  return out;
}

}  // namespace

std::vector<double> ToyPolicy::option_logits(const PolicyContext& context) const {
  const std::vector<double> f = features(context);
  const int k = shape_.n_options;
  std::vector<double> z = linear_head(std::span(params_).first(k * f.size()), k, f);
  const int available = context.sample->n_options();
  if (available > k) throw InvalidArgument("toy policy: sample has more options than the head");
  for (int j = available; j < k; ++j) z[j] = kNegInf;
  return z;
}

std::vector<double> ToyPolicy::think_logits(const PolicyContext& context) const {
  const std::vector<double> f = features(context);
  const std::size_t offset = shape_.n_options * f.size();
  return linear_head(std::span(params_).subspan(offset), think_vocab(), f);
}

std::string ToyPolicy::think_word(int token) const {
  if (token == 0) return "blank";
  return std::string("cue-") + letter_at(token - 1);
}

Generation ToyPolicy::sample(const PolicyContext& context, const SamplingParams& params,
                             std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  const std::vector<double> think_lp =
      nucleus_log_probs(think_logits(context), params.temperature, params.top_p);
  const std::vector<double> option_lp =
      nucleus_log_probs(option_logits(context), params.temperature, params.top_p);

  Generation out;
  int emitted = 0;
  bool stopped = false;
  // Appends one decoder step; false once the token cap or the sentinel hit.
  auto emit = [&](const std::string& piece) {
    if (stopped || emitted >= params.max_tokens) return false;
    out.text += piece;
    ++emitted;
    if (!params.stop_sentinel.empty() && out.text.ends_with(params.stop_sentinel)) stopped = true;
    return true;
  };

  if (!emit(std::string(kThinkOpen))) return out;
  for (int t = 0; t < shape_.think_length; ++t) {
    if (stopped || emitted >= params.max_tokens) return out;
    const int token = sample_index(think_lp, rng);
    emit((t == 0 ? "" : " ") + think_word(token));
    out.tokens.push_back(token);
    out.logp.push_back(think_lp[token]);
  }
  if (!emit(std::string(kThinkClose)) || !emit(std::string(kAnswerOpen))) return out;
  if (stopped || emitted >= params.max_tokens) return out;
  const int option = sample_index(option_lp, rng);
  emit(std::string(1, letter_at(option)));
  out.tokens.push_back(letter_token(option));
  out.logp.push_back(option_lp[option]);
  emit(std::string(kAnswerClose));
  return out;
}

std::vector<double> ToyPolicy::logprobs(const PolicyContext& context,
                                        std::span<const int> tokens,
                                        const SamplingParams& params) const {
  if (tokens.size() > static_cast<std::size_t>(shape_.think_length) + 1) {
    throw InvalidArgument("toy policy: token sequence longer than the output format");
  }
  const std::vector<double> think_lp =
      nucleus_log_probs(think_logits(context), params.temperature, params.top_p);
  const std::vector<double> option_lp =
      nucleus_log_probs(option_logits(context), params.temperature, params.top_p);
  std::vector<double> out;
  out.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const int token = tokens[t];
    if (static_cast<int>(t) < shape_.think_length) {
      if (token < 0 || token >= think_vocab()) throw InvalidArgument("toy policy: bad think token");
      out.push_back(think_lp[token]);
    } else {
      const int option = token - think_vocab();
      if (option < 0 || option >= shape_.n_options) {
        throw InvalidArgument("toy policy: bad answer token");
      }
      out.push_back(option_lp[option]);
    }
  }
  return out;
}

void ToyPolicy::accumulate_logprob_gradient(const PolicyContext& context,
                                            std::span<const int> tokens,
                                            const SamplingParams& params,
                                            std::span<const double> token_weights,
                                            std::span<double> grad) const {
  if (token_weights.size() != tokens.size()) {
    throw InvalidArgument("toy policy: token weight length mismatch");
  }
  if (grad.size() != params_.size()) throw InvalidArgument("toy policy: gradient size mismatch");
  const std::vector<double> f = features(context);
  const std::size_t d = f.size();
  const int k = shape_.n_options;
  const std::vector<double> think_lp =
      nucleus_log_probs(think_logits(context), params.temperature, params.top_p);
  const std::vector<double> option_lp =
      nucleus_log_probs(option_logits(context), params.temperature, params.top_p);
  const double inv_temperature = 1.0 / params.temperature;

  // d log q_a / d z_j = (1[j = a] - q_j) / T over the kept nucleus.
  auto accumulate = [&](const std::vector<double>& lp, int chosen, std::size_t offset,
                        double weight) {
    if (weight == 0.0 || std::isinf(lp[chosen])) return;
    for (std::size_t j = 0; j < lp.size(); ++j) {
      if (std::isinf(lp[j])) continue;
      const double dz =
          weight * ((static_cast<int>(j) == chosen ? 1.0 : 0.0) - std::exp(lp[j])) *
          inv_temperature;
      double* row = grad.data() + offset + j * d;
      for (std::size_t c = 0; c < d; ++c) row[c] += dz * f[c];
    }
  };

  const std::size_t think_offset = k * d;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (static_cast<int>(t) < shape_.think_length) {
      accumulate(think_lp, tokens[t], think_offset, token_weights[t]);
    } else {
      accumulate(option_lp, tokens[t] - think_vocab(), 0, token_weights[t]);
    }
  }
}

std::string toy_checkpoint_json(const ToyPolicy& policy, std::string_view config_json) {
  detail::json out;
  out["format"] = kCheckpointFormat;
  out["version"] = kCheckpointVersion;
  out["shape"] = {{"n_options", policy.shape().n_options},
                  {"think_length", policy.shape().think_length},
                  {"feature_scale", policy.shape().feature_scale}};
  const auto params = policy.parameters();
  out["parameters"] = std::vector<double>(params.begin(), params.end());
  out["config"] = detail::json::parse(config_json.empty() ? std::string_view("{}") : config_json);
  return out.dump(2) + "\n";
}

ToyPolicy parse_toy_checkpoint(std::string_view text) {
  detail::json blob;
  try {
    blob = detail::json::parse(text);
  } catch (const detail::json::parse_error& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (detail::require_as<std::string>(blob, "format", 0) != kCheckpointFormat) {
    throw FormatError("checkpoint format is not " + std::string(kCheckpointFormat), 0, "format");
  }
  const int version = detail::require_as<int>(blob, "version", 0);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), 0, "version");
  }
  const auto& shape_json = detail::require(blob, "shape", 0);
  ToyPolicyShape shape;
  shape.n_options = detail::require_as<int>(shape_json, "n_options", 0);
  shape.think_length = detail::require_as<int>(shape_json, "think_length", 0);
  shape.feature_scale = detail::require_as<double>(shape_json, "feature_scale", 0);
  return ToyPolicy(shape, detail::require_as<std::vector<double>>(blob, "parameters", 0));
}

}  // namespace vrts
