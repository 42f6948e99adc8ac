#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "expertloop/knowledge/knowledge_store.hpp"

namespace expertloop::knowledge {

struct CorpusDocument {
    std::string doc_id;
    std::string text;
    Tier tier = Tier::Raw;
};

// Reads a corpus directory: one UTF-8 .txt file per document (file stem is the
// doc id) and a manifest.json mapping doc id -> "raw" | "expert-faq".
// Documents are returned sorted by doc id.
std::vector<CorpusDocument> load_corpus(const std::filesystem::path& dir);

// Ingests every non-empty document; returns the number of chunks created.
std::size_t ingest_corpus(KnowledgeStore& store, const std::vector<CorpusDocument>& docs, Timestamp now);

}  // namespace expertloop::knowledge
