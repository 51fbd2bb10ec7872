#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geotri::io {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

// Strict decimal parse: the whole (trimmed) field must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// %.17g, enough for an exact double round trip.
std::string format_exact(double v);

// Shortest representation that still round-trips exactly.
std::string format_shortest(double v);

}  // namespace geotri::io
