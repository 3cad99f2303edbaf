#include "vrts/response.hpp"

#include <cctype>

namespace vrts {
namespace {

bool is_blank(std::string_view text) {
  for (const char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::size_t count(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

std::optional<Letter> extract_answer(std::string_view answer_block, int n_options) {
  char kept = 0;
  int n_kept = 0;
  for (const char c : answer_block) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u) || std::ispunct(u)) continue;
    kept = c;
    if (++n_kept > 1) return std::nullopt;
  }
  if (n_kept != 1 || !std::isalpha(static_cast<unsigned char>(kept))) return std::nullopt;
  const Letter letter = static_cast<Letter>(std::toupper(static_cast<unsigned char>(kept)));
  const int index = letter_index(letter);
  if (index < 0 || index >= n_options) return std::nullopt;
  return letter;
}

std::optional<Letter> parse_answer(std::string_view raw, int n_options) {
  const auto open = raw.find(kAnswerOpen);
  if (open == std::string_view::npos) return std::nullopt;
  const auto body = open + kAnswerOpen.size();
  const auto close = raw.find(kAnswerClose, body);
  if (close == std::string_view::npos) return std::nullopt;
  return extract_answer(raw.substr(body, close - body), n_options);
}

ParsedResponse parse_response(std::string_view raw, int n_options) {
  ParsedResponse out;
  out.raw = std::string(raw);

  const auto think_open = raw.find(kThinkOpen);
  if (think_open != std::string_view::npos) {
    const auto body = think_open + kThinkOpen.size();
    const auto think_close = raw.find(kThinkClose, body);
    if (think_close != std::string_view::npos) {
      out.think = std::string(raw.substr(body, think_close - body));
    }
  }

  const auto answer_open = raw.find(kAnswerOpen);
  std::size_t answer_close = std::string_view::npos;
  if (answer_open != std::string_view::npos) {
    const auto body = answer_open + kAnswerOpen.size();
    answer_close = raw.find(kAnswerClose, body);
    if (answer_close != std::string_view::npos) {
      out.answer = extract_answer(raw.substr(body, answer_close - body), n_options);
    }
  }

  const bool each_once = count(raw, kThinkOpen) == 1 && count(raw, kThinkClose) == 1 &&
                         count(raw, kAnswerOpen) == 1 && count(raw, kAnswerClose) == 1;
  if (each_once && out.think && answer_close != std::string_view::npos &&
      think_open < answer_open) {
    const auto think_end = raw.find(kThinkClose) + kThinkClose.size();
    const auto tail = answer_close + kAnswerClose.size();
    out.well_formed_format = is_blank(raw.substr(0, think_open)) &&
                             is_blank(raw.substr(think_end, answer_open - think_end)) &&
                             is_blank(raw.substr(tail));
  }
  return out;
}

std::string render_response(std::string_view think, Letter answer) {
  std::string out;
  out.reserve(think.size() + 40);
  out += kThinkOpen;
  out += think;
  out += kThinkClose;
  out += kAnswerOpen;
  out += answer;
  out += kAnswerClose;
  return out;
}

}  // namespace vrts
