#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace recallkit::text {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

/// Splits on every occurrence of `sep`; keeps empty fields.
std::vector<std::string> split(std::string_view s, char sep);

/// Splits on runs of ASCII whitespace; drops empty fields.
std::vector<std::string> split_ws(std::string_view s);

/// Strict numeric parsing: the whole field must be consumed.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, std::int64_t& out);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// UTC calendar date ("YYYY-MM-DD") of a unix timestamp.
std::string utc_date(std::int64_t unix_seconds);

/// Seconds since epoch of 00:00:00 UTC on `date` ("YYYY-MM-DD"); throws on bad input.
std::int64_t utc_midnight(std::string_view date);

}  // namespace recallkit::text
