#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "vigil/errors.hpp"

namespace vigil {

// Shortest representation that round-trips exactly; locale-independent.
inline std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc() || result.ptr != last)
    throw FormatError("invalid number '" + std::string(text) + "' in " + context);
  return value;
}

inline long parse_long(std::string_view text, const std::string& context) {
  long value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc() || result.ptr != last)
    throw FormatError("invalid integer '" + std::string(text) + "' in " + context);
  return value;
}

// Fields are plain (no quoting); writers refuse values that would need it.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

inline void check_plain_field(std::string_view value, const std::string& context) {
  if (value.find_first_of(",\"\r\n") != std::string_view::npos)
    throw ValidationError(context + " must not contain commas, quotes, or line breaks");
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open " + path + " for writing");
  }

  void write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
    if (!out_) throw IoError("write failed on " + path_);
  }

  void close() {
    out_.close();
    if (out_.fail()) throw IoError("close failed on " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

// Strips one trailing '\r' so files written on Windows load unchanged.
inline bool read_csv_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace vigil
