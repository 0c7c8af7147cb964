#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace affectsense::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split(std::string_view line);
/// Quotes a field only when needed.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

/// Splits text into lines, dropping a trailing "\r" and a UTF-8 BOM on the first line.
std::vector<std::string_view> lines(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string_view trim(std::string_view s);

std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

} // namespace affectsense::csv
