#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cuq {

/// Locale-independent rendering with 17 significant digits (round-trips exactly).
std::string format_double(double value);

/// Locale-independent parse of a whole field; throws InvalidParameter on junk.
double parse_double(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace cuq
