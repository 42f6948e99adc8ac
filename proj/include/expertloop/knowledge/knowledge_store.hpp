#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "expertloop/core/time.hpp"
#include "expertloop/knowledge/chunker.hpp"
#include "expertloop/knowledge/embedding.hpp"

namespace expertloop::knowledge {

enum class Tier { Raw, ExpertFAQ };

std::string_view to_string(Tier tier);
Tier parse_tier(std::string_view s);

inline constexpr const char* kExpertFaqDocId = "expert-faq";

struct KnowledgeChunk {
    std::string chunk_id;
    std::string doc_id;
    std::string text;
    Vector embedding;
    Tier tier = Tier::Raw;
    Timestamp ingested_at{};
};

struct ScoredChunk {
    KnowledgeChunk chunk;
    double score = 0.0;
};

struct SearchResult {
    std::vector<ScoredChunk> raw_chunks;
    std::vector<ScoredChunk> faq_chunks;

    std::size_t size() const { return raw_chunks.size() + faq_chunks.size(); }
};

struct FaqEntry {
    std::string question;
    std::string answer;

    friend bool operator==(const FaqEntry&, const FaqEntry&) = default;
};

std::string format_faq_entry(const FaqEntry& entry);

// Ordering used for ranking: higher score first, then older ingestion, then
// chunk id ascending.
bool ranks_before(const ScoredChunk& a, const ScoredChunk& b);

struct StoreOptions {
    std::size_t chunk_budget = kDefaultChunkBudget;
    std::string faq_doc_id = kExpertFaqDocId;
};

// Exhaustive-scan vector store. One writer at a time; searches share a lock
// and see a consistent snapshot.
class KnowledgeStore {
public:
    explicit KnowledgeStore(std::shared_ptr<const EmbeddingProvider> embedder, StoreOptions options = {});

    std::vector<std::string> ingest_document(const std::string& doc_id, std::string_view text, Tier tier,
                                             Timestamp now);

    SearchResult search(std::string_view query_text, std::size_t k = 3) const;

    std::size_t append_faq_entries(const std::vector<FaqEntry>& entries, Timestamp now);

    std::vector<KnowledgeChunk> chunks() const;
    std::size_t chunk_count() const;
    std::size_t chunk_count(Tier tier) const;
    bool has_document(const std::string& doc_id) const;
    std::size_t dimension() const { return embedder_->dimension(); }

private:
    std::string next_chunk_id(const std::string& doc_id) const;
    Vector embed_checked(std::string_view text) const;

    std::shared_ptr<const EmbeddingProvider> embedder_;
    StoreOptions options_;
    mutable std::shared_mutex mutex_;
    std::vector<KnowledgeChunk> chunks_;
    std::map<std::string, std::size_t> doc_chunk_counts_;
};

}  // namespace expertloop::knowledge
