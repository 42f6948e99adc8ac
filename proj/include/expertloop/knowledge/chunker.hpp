#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace expertloop::knowledge {

inline constexpr std::size_t kDefaultChunkBudget = 500;

// Splits on blank-line paragraph boundaries and greedily packs paragraphs
// (joined by a blank line) into chunks of at most `budget` characters. Each
// chunk after the first repeats the previous chunk's last paragraph when that
// paragraph and the next new one fit together. Paragraphs longer than the
// budget are first cut at sentence/word boundaries.
std::vector<std::string> chunk_document(std::string_view text, std::size_t budget = kDefaultChunkBudget);

std::vector<std::string> split_paragraphs(std::string_view text);

}  // namespace expertloop::knowledge
