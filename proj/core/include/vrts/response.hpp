#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "vrts/types.hpp"

namespace vrts {

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";

// Normalizes an answer block to a single option letter.
//
// Whitespace and punctuation are dropped and the rest is uppercased. The block
// yields a letter only when exactly one character survives, it is alphabetic,
// and it names one of the first `n_options` letters.
std::optional<Letter> extract_answer(std::string_view answer_block, int n_options);

// The letter in the first closed answer block, as parse_response reports it.
std::optional<Letter> parse_answer(std::string_view raw, int n_options = kMaxOptions);

// Parses a raw completion. `well_formed_format` requires exactly one think
// block followed by exactly one answer block with only whitespace around and
// between them. The answer is read from the first closed answer block even
// when the overall format is broken.
ParsedResponse parse_response(std::string_view raw, int n_options = kMaxOptions);

// Inverse of parse_response for well-formed pairs.
std::string render_response(std::string_view think, Letter answer);

}  // namespace vrts
