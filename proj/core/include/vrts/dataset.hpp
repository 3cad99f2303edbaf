#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrts/types.hpp"

namespace vrts {

// One line of the dataset file, without the trailing newline. Keys are emitted
// in sorted order so normalized records are byte-stable.
std::string dataset_line(const McqaSample& sample);

// Parses one dataset line; errors carry the line number and the field name.
McqaSample parse_dataset_line(std::string_view line, std::size_t line_no = 0);

std::vector<McqaSample> parse_dataset(std::string_view text);
std::string serialize_dataset(std::span<const McqaSample> samples);

std::vector<McqaSample> load_dataset(const std::filesystem::path& path);
void save_dataset(std::span<const McqaSample> samples, const std::filesystem::path& path);

}  // namespace vrts
