#include "swasr/text.hpp"

#include "swasr/error.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace swasr {
namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || normalizer == nullptr) throw Error("ICU NFC normalizer unavailable");
  return *normalizer;
}

icu::UnicodeString normalize(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc().normalize(s, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  return out;
}

std::string utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

}  // namespace

std::string fold(std::string_view text) {
  icu::UnicodeString s = normalize(icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), int32_t(text.size()))));
  s.foldCase();
  return utf8(normalize(s));
}

std::string fold_trim(std::string_view text) { return trim(fold(text)); }

std::u32string to_code_points(std::string_view text) {
  const icu::UnicodeString s =
      normalize(icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), int32_t(text.size()))));
  std::u32string out;
  out.reserve(std::size_t(s.length()));
  for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1)) out.push_back(char32_t(s.char32At(i)));
  return out;
}

std::string to_utf8(std::u32string_view code_points) {
  icu::UnicodeString s;
  for (char32_t c : code_points) s.append(UChar32(c));
  return utf8(s);
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> tokens;
  std::u32string current;
  for (char32_t c : to_code_points(text)) {
    if (u_isUWhiteSpace(UChar32(c))) {
      if (!current.empty()) tokens.push_back(to_utf8(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(to_utf8(current));
  return tokens;
}

std::string strip_punctuation(std::string_view token) {
  const std::u32string cps = to_code_points(token);
  auto is_strippable = [](char32_t c) { return u_ispunct(UChar32(c)) || u_hasBinaryProperty(UChar32(c), UCHAR_S_TERM); };
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && is_strippable(cps[begin])) ++begin;
  while (end > begin && is_strippable(cps[end - 1])) --end;
  return to_utf8(std::u32string_view(cps).substr(begin, end - begin));
}

std::string trim(std::string_view text) {
  const std::u32string cps = to_code_points(text);
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && u_isUWhiteSpace(UChar32(cps[begin]))) ++begin;
  while (end > begin && u_isUWhiteSpace(UChar32(cps[end - 1]))) --end;
  return to_utf8(std::u32string_view(cps).substr(begin, end - begin));
}

}  // namespace swasr
