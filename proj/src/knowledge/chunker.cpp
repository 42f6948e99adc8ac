#include "expertloop/knowledge/chunker.hpp"

#include <optional>

#include "expertloop/core/text.hpp"

namespace expertloop::knowledge {

namespace {

constexpr std::string_view kParagraphSep = "\n\n";

std::size_t joined_length(const std::vector<std::string>& paras, std::size_t begin, std::size_t end) {
    std::size_t n = 0;
    for (std::size_t i = begin; i < end; ++i) n += text::char_count(paras[i]);
    return n + (end > begin ? (end - begin - 1) * kParagraphSep.size() : 0);
}

// Cuts an oversized paragraph into pieces of at most `budget` characters.
std::vector<std::string> cut_paragraph(std::string_view para, std::size_t budget) {
    std::vector<std::string> pieces;
    std::string rest(para);
    while (text::char_count(rest) > budget) {
        std::string head = text::truncate_at_sentence(rest, budget);
        if (head.empty()) head = rest.substr(0, text::byte_offset_of_char(rest, budget));
        pieces.push_back(head);
        rest = text::trim(std::string_view(rest).substr(head.size()));
    }
    if (!rest.empty()) pieces.push_back(rest);
    return pieces;
}

}  // namespace

std::vector<std::string> split_paragraphs(std::string_view text) {
    std::vector<std::string> paras;
    std::string current;
    for (const auto& line : text::split(text, '\n')) {
        if (text::trim(line).empty()) {
            if (!text::trim(current).empty()) paras.push_back(text::trim(current));
            current.clear();
        } else {
            if (!current.empty()) current += '\n';
            current += line;
        }
    }
    if (!text::trim(current).empty()) paras.push_back(text::trim(current));
    return paras;
}

std::vector<std::string> chunk_document(std::string_view text, std::size_t budget) {
    std::vector<std::string> paras;
    for (const auto& p : split_paragraphs(text)) {
        for (auto& piece : cut_paragraph(p, budget)) paras.push_back(std::move(piece));
    }

    std::vector<std::string> chunks;
    std::size_t next = 0;             // first paragraph not yet in any chunk
    std::optional<std::size_t> carry;  // previous chunk's last paragraph
    while (next < paras.size()) {
        std::size_t begin = next;
        if (carry && joined_length(paras, *carry, next + 1) <= budget) begin = *carry;
        std::size_t end = next + 1;
        while (end < paras.size() && joined_length(paras, begin, end + 1) <= budget) ++end;

        std::vector<std::string> members(paras.begin() + static_cast<std::ptrdiff_t>(begin),
                                         paras.begin() + static_cast<std::ptrdiff_t>(end));
        chunks.push_back(text::join(members, kParagraphSep));
        carry = end - 1;
        next = end;
    }
    return chunks;
}

}  // namespace expertloop::knowledge
