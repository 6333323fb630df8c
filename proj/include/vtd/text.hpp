#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text and file helpers shared by the parsers and the CLI.
namespace vtd::text {

// Splits on '\n' and strips one trailing '\r' per line. A final empty
// line produced by a trailing newline is dropped.
std::vector<std::string_view> split_lines(std::string_view text);

std::vector<std::string_view> split_ws(std::string_view line);
std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
// Fixed-point with the given number of decimals.
std::string format_fixed(double v, int decimals);

std::string read_file(const std::filesystem::path& path);
std::vector<unsigned char> read_binary(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace vtd::text
