#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace swasr {

/// NFC-normalizes and case-folds UTF-8 text. Invalid byte sequences become U+FFFD.
std::string fold(std::string_view text);

/// fold() followed by trimming of surrounding whitespace.
std::string fold_trim(std::string_view text);

/// Decodes UTF-8 into NFC scalar values.
std::u32string to_code_points(std::string_view text);
std::string to_utf8(std::u32string_view code_points);

/// Splits on Unicode whitespace.
std::vector<std::string> split_whitespace(std::string_view text);

/// Removes leading and trailing punctuation/symbol code points.
std::string strip_punctuation(std::string_view token);

std::string trim(std::string_view text);

}  // namespace swasr
