#include "expertloop/core/text.hpp"

#include <algorithm>
#include <cctype>

namespace expertloop::text {

namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0u) == 0x80u; }

bool is_space(char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; }

bool is_sentence_end(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

std::size_t char_count(std::string_view utf8) {
    return static_cast<std::size_t>(
        std::count_if(utf8.begin(), utf8.end(), [](char c) { return !is_continuation(static_cast<unsigned char>(c)); }));
}

std::size_t byte_offset_of_char(std::string_view utf8, std::size_t n) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < utf8.size(); ++i) {
        if (!is_continuation(static_cast<unsigned char>(utf8[i]))) {
            if (seen == n) return i;
            ++seen;
        }
    }
    return utf8.size();
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    return to_lower_ascii(haystack).find(to_lower_ascii(needle)) != std::string::npos;
}

std::string truncate_words_with_ellipsis(std::string_view s, std::size_t keep_limit) {
    std::string t = trim(s);
    if (char_count(t) <= keep_limit + 3) return t;
    std::string_view head(t.data(), byte_offset_of_char(t, keep_limit));
    // prefer a cut at whitespace that still leaves something behind
    std::size_t cut = head.size();
    if (head.size() < t.size() && !is_space(t[head.size()])) {
        auto ws = head.find_last_of(" \n\t");
        if (ws != std::string_view::npos && ws > 0) cut = ws;
    }
    std::string out = trim(head.substr(0, cut));
    while (!out.empty() && (out.back() == ',' || out.back() == ';' || out.back() == ':')) out.pop_back();
    return out + "...";
}

std::string truncate_at_sentence(std::string_view s, std::size_t limit) {
    if (char_count(s) <= limit) return std::string(s);
    std::string_view head = s.substr(0, byte_offset_of_char(s, limit));
    // last sentence end whose following char (in the original) is space or end
    for (std::size_t i = head.size(); i > 0; --i) {
        std::size_t p = i - 1;
        if (is_sentence_end(head[p]) && (p + 1 >= s.size() || is_space(s[p + 1]))) {
            return trim(head.substr(0, p + 1));
        }
    }
    auto ws = head.find_last_of(" \n\t");
    if (ws != std::string_view::npos && ws > 0) return trim(head.substr(0, ws));
    return std::string(head);
}

std::vector<std::string> sentences(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        bool boundary = is_sentence_end(s[i]) && (i + 1 == s.size() || is_space(s[i + 1]));
        bool para = s[i] == '\n';
        if (boundary || para) {
            auto piece = trim(s.substr(start, (boundary ? i + 1 : i) - start));
            if (!piece.empty()) out.push_back(std::move(piece));
            start = i + 1;
        }
    }
    auto tail = trim(s.substr(std::min(start, s.size())));
    if (!tail.empty()) out.push_back(std::move(tail));
    return out;
}

}  // namespace expertloop::text
