#pragma once

// Small helpers shared by the CSV readers and writers.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fvc::detail {

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Whole-field parse; throws a parse error mentioning `context` otherwise.
double parse_double(std::string_view field, std::string_view context);
long parse_long(std::string_view field, std::string_view context);

// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace fvc::detail
