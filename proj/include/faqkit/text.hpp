#pragma once

#include <string>
#include <string_view>
#include <vector>

// Thin UTF-8 helpers over ICU. All functions take and return UTF-8.
namespace faqkit::text {

std::string nfkc(std::string_view s);
std::string lowercase(std::string_view s);
/// Decompose, drop combining marks, recompose.
std::string strip_accents(std::string_view s);

/// Splits into code points, each returned as its UTF-8 encoding.
std::vector<std::string> code_points(std::string_view s);
std::size_t code_point_count(std::string_view s);
std::u32string to_u32(std::string_view s);

/// Splits on Unicode whitespace, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool is_letter_or_digit(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);
bool is_upper(char32_t cp);

/// Throws DataError when s is not well-formed UTF-8.
void require_utf8(std::string_view s);

}  // namespace faqkit::text
