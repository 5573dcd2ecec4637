#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vigil/errors.hpp"

namespace vigil::detail {

inline constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const std::uint8_t* data, std::size_t size) {
  std::string out;
  out.reserve((size + 2) / 3 * 4);
  for (std::size_t i = 0; i < size; i += 3) {
    const std::uint32_t b0 = data[i];
    const std::uint32_t b1 = i + 1 < size ? data[i + 1] : 0;
    const std::uint32_t b2 = i + 2 < size ? data[i + 2] : 0;
    const std::uint32_t triple = (b0 << 16) | (b1 << 8) | b2;
    out.push_back(kBase64Alphabet[(triple >> 18) & 0x3F]);
    out.push_back(kBase64Alphabet[(triple >> 12) & 0x3F]);
    out.push_back(i + 1 < size ? kBase64Alphabet[(triple >> 6) & 0x3F] : '=');
    out.push_back(i + 2 < size ? kBase64Alphabet[triple & 0x3F] : '=');
  }
  return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw FormatError("base64 payload length must be a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  const auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    if (c == '=') return -1;
    throw FormatError("invalid base64 character");
  };
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const int v0 = value_of(text[i]);
    const int v1 = value_of(text[i + 1]);
    const int v2 = value_of(text[i + 2]);
    const int v3 = value_of(text[i + 3]);
    if (v0 < 0 || v1 < 0) throw FormatError("malformed base64 padding");
    out.push_back(static_cast<std::uint8_t>((v0 << 2) | (v1 >> 4)));
    if (v2 >= 0) out.push_back(static_cast<std::uint8_t>(((v1 & 0xF) << 4) | (v2 >> 2)));
    if (v3 >= 0) {
      if (v2 < 0) throw FormatError("malformed base64 padding");
      out.push_back(static_cast<std::uint8_t>(((v2 & 0x3) << 6) | v3));
    }
  }
  return out;
}

// Doubles travel as explicit little-endian IEEE-754 bytes inside base64, so
// a model file is identical regardless of host endianness.
inline std::string encode_doubles(const double* values, std::size_t count) {
  std::vector<std::uint8_t> bytes(count * 8);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &values[i], 8);
    for (int b = 0; b < 8; ++b)
      bytes[i * 8 + static_cast<std::size_t>(b)] =
          static_cast<std::uint8_t>((bits >> (8 * b)) & 0xFF);
  }
  return base64_encode(bytes.data(), bytes.size());
}

inline std::vector<double> decode_doubles(const std::string& text) {
  const auto bytes = base64_decode(text);
  if (bytes.size() % 8 != 0) throw FormatError("double payload must be a multiple of 8 bytes");
  std::vector<double> values(bytes.size() / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b)
      bits = (bits << 8) | bytes[i * 8 + static_cast<std::size_t>(b)];
    std::memcpy(&values[i], &bits, 8);
  }
  return values;
}

inline std::string encode_vector(const Eigen::VectorXd& v) {
  return encode_doubles(v.data(), static_cast<std::size_t>(v.size()));
}

inline Eigen::VectorXd decode_vector(const std::string& text, Eigen::Index expected_size = -1) {
  const auto values = decode_doubles(text);
  if (expected_size >= 0 && static_cast<Eigen::Index>(values.size()) != expected_size)
    throw FormatError("decoded vector has unexpected length");
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

// Matrices are encoded row-major with explicit dimensions alongside.
inline std::string encode_matrix(const Eigen::MatrixXd& m) {
  std::vector<double> row_major(static_cast<std::size_t>(m.size()));
  std::size_t at = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) row_major[at++] = m(r, c);
  return encode_doubles(row_major.data(), row_major.size());
}

inline Eigen::MatrixXd decode_matrix(const std::string& text, Eigen::Index rows,
                                     Eigen::Index cols) {
  const auto values = decode_doubles(text);
  if (static_cast<Eigen::Index>(values.size()) != rows * cols)
    throw FormatError("decoded matrix has unexpected size");
  Eigen::MatrixXd m(rows, cols);
  std::size_t at = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[at++];
  return m;
}

}  // namespace vigil::detail
