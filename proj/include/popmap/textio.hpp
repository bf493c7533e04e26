#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace popmap {

// Shortest round-trip formatting; keeps ASCII rasters and CSVs lossless
// and locale-independent.
inline std::string fmt_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view s, double& out);
bool parse_i64(std::string_view s, long long& out);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Splits one CSV line on commas; no quoting (none of the formats need it).
std::vector<std::string_view> split_csv(std::string_view line);

// Strips a trailing '\r' so CRLF inputs parse like LF.
std::string_view chomp(std::string_view line);

}  // namespace popmap
