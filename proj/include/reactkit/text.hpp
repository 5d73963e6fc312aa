#pragma once

// Small text helpers shared by the CSV / line-protocol readers and writers.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace reactkit::text {

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Strict full-field numeric parses; return false on any trailing garbage.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, long long& out);
bool parse_uint(std::string_view s, unsigned long long& out);

// Shortest representation that round-trips exactly ("10000", "33.333333333333336").
std::string format_double(double v);

// Write-temp-then-rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace reactkit::text
