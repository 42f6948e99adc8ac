#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace expertloop::text {

inline constexpr std::size_t kMessageLimit = 700;
inline constexpr std::size_t kSuggestionLimit = 72;

// Length in Unicode code points; limits on the channel are character limits.
std::size_t char_count(std::string_view utf8);

// Byte offset of the n-th code point (or size() when n >= char_count).
std::size_t byte_offset_of_char(std::string_view utf8, std::size_t n);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool contains_ci(std::string_view haystack, std::string_view needle);

// Keeps at most `limit` characters, cutting at the last whitespace so that the
// result plus "..." fits in `limit + 3` characters. Used for suggestion labels
// (69 + "..." = 72).
std::string truncate_words_with_ellipsis(std::string_view s, std::size_t keep_limit);

// Cuts to at most `limit` characters, preferring the end of the last complete
// sentence, then the last word boundary, then a hard cut.
std::string truncate_at_sentence(std::string_view s, std::size_t limit);

// Splits prose into sentences on '.', '!' or '?' followed by whitespace or end.
std::vector<std::string> sentences(std::string_view s);

}  // namespace expertloop::text
