#pragma once

// Internal helpers shared by the file writers.

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace noseheat::detail {

// Shortest decimal text that parses back to the same value.
template <typename T>
std::string format_number(T value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& context);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string read_text(const std::filesystem::path& path);

// Writes to a sibling temporary and renames over the target.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace noseheat::detail
