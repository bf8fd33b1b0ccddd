#pragma once

// Small text helpers shared by the CSV-style readers and writers.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clipscale::text {

struct Line {
    std::size_t number;  // 1-based physical line
    std::string_view content;
};

// Splits into lines, dropping blank lines and lines whose first
// non-space character is '#'. Handles CRLF.
std::vector<Line> data_lines(std::string_view text);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

std::optional<double> parse_double(std::string_view s);
std::optional<std::uint64_t> parse_u64(std::string_view s);
std::optional<std::int64_t> parse_i64(std::string_view s);

// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace clipscale::text
