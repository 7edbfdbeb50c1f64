#include "faqkit/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "faqkit/common.hpp"

namespace faqkit::text {
namespace {

icu::UnicodeString from_utf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

const icu::Normalizer2& normalizer(bool nfkc_form) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = nfkc_form ? icu::Normalizer2::getNFKCInstance(status)
                                        : icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw std::runtime_error("ICU normalizer unavailable");
  }
  return *n;
}

}  // namespace

std::string nfkc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  auto out = normalizer(true).normalize(from_utf8(s), status);
  if (U_FAILURE(status)) throw DataError("NFKC normalization failed");
  return to_utf8(out);
}

std::string lowercase(std::string_view s) {
  auto u = from_utf8(s);
  u.toLower(icu::Locale::getRoot());
  return to_utf8(u);
}

std::string strip_accents(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  auto decomposed = normalizer(false).normalize(from_utf8(s), status);
  if (U_FAILURE(status)) throw DataError("NFD normalization failed");
  icu::UnicodeString kept;
  for (int32_t i = 0; i < decomposed.length();) {
    UChar32 cp = decomposed.char32At(i);
    if (u_charType(cp) != U_NON_SPACING_MARK) kept.append(cp);
    i += U16_LENGTH(cp);
  }
  return to_utf8(kept);
}

std::u32string to_u32(std::string_view s) {
  std::u32string out;
  int32_t i = 0;
  const auto n = static_cast<int32_t>(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  while (i < n) {
    UChar32 cp;
    U8_NEXT(p, i, n, cp);
    if (cp < 0) throw DataError("invalid UTF-8 input");
    out.push_back(static_cast<char32_t>(cp));
  }
  return out;
}

std::vector<std::string> code_points(std::string_view s) {
  std::vector<std::string> out;
  int32_t i = 0;
  const auto n = static_cast<int32_t>(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  while (i < n) {
    int32_t start = i;
    UChar32 cp;
    U8_NEXT(p, i, n, cp);
    if (cp < 0) throw DataError("invalid UTF-8 input");
    out.emplace_back(s.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
  }
  return out;
}

std::size_t code_point_count(std::string_view s) { return to_u32(s).size(); }

void require_utf8(std::string_view s) { (void)to_u32(s); }

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  int32_t i = 0;
  const auto n = static_cast<int32_t>(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  while (i < n) {
    int32_t start = i;
    UChar32 cp;
    U8_NEXT(p, i, n, cp);
    if (cp < 0) throw DataError("invalid UTF-8 input");
    if (is_space(static_cast<char32_t>(cp))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.append(s.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

bool is_letter_or_digit(char32_t cp) { return u_isalnum(static_cast<UChar32>(cp)) != 0; }
bool is_digit(char32_t cp) { return u_isdigit(static_cast<UChar32>(cp)) != 0; }
bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0; }
bool is_upper(char32_t cp) { return u_isupper(static_cast<UChar32>(cp)) != 0; }

}  // namespace faqkit::text
