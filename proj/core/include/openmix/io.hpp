#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace openmix {

/// Shortest-stable decimal form used by every text output: 17 significant digits.
std::string format_double(double value);

/// Strict full-string parse; std::nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string_view trim(std::string_view text);

}  // namespace openmix
