#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "faqkit/common.hpp"

namespace faqkit::io {

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Little-endian binary helpers shared by every on-disk model format.
template <typename T>
void write_pod(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated binary stream");
  return value;
}

void write_string(std::ostream& out, const std::string& s);
std::string read_string(std::istream& in);
void write_doubles(std::ostream& out, std::span<const double> values);
std::vector<double> read_doubles(std::istream& in);
void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);
void expect_magic(std::istream& in, std::string_view magic);

}  // namespace faqkit::io
