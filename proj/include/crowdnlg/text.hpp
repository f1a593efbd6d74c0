#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace crowdnlg::text {

/// Decodes UTF-8 into Unicode scalar values. Invalid sequences decode to
/// U+FFFD one byte at a time so that lengths stay well-defined.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

/// Number of Unicode scalar values (not bytes).
std::size_t code_point_count(std::string_view s);

bool is_whitespace(char32_t cp);
bool is_digit(char32_t cp);
/// ASCII letters plus the letters of Latin-1 Supplement and Latin Extended-A/B.
bool is_letter(char32_t cp);

char32_t fold_case(char32_t cp);
std::string fold_case(std::string_view s);

/// Trim, collapse internal whitespace runs to one space.
std::string collapse_whitespace(std::string_view s);

/// Trim + collapse + case-fold.
std::string normalize_utterance(std::string_view s);

/// Case-folds and maps every non letter/digit to a space, then collapses.
/// Used for word-boundary phrase matching.
std::string normalize_words(std::string_view s);

/// True if `needle` occurs in `haystack` starting and ending on word
/// boundaries. Both arguments must already be in normalize_words() form.
bool contains_words(std::string_view haystack, std::string_view needle);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace crowdnlg::text
