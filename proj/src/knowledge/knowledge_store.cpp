#include "expertloop/knowledge/knowledge_store.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"

namespace expertloop::knowledge {

std::string_view to_string(Tier tier) { return tier == Tier::Raw ? "raw" : "expert-faq"; }

Tier parse_tier(std::string_view s) {
    if (text::iequals(s, "raw")) return Tier::Raw;
    if (text::iequals(s, "expert-faq") || text::iequals(s, "ExpertFAQ")) return Tier::ExpertFAQ;
    throw Error(Errc::InvalidArgument, "unknown tier '" + std::string(s) + "'");
}

std::string format_faq_entry(const FaqEntry& entry) { return "Q: " + entry.question + "\nA: " + entry.answer; }

bool ranks_before(const ScoredChunk& a, const ScoredChunk& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.chunk.ingested_at != b.chunk.ingested_at) return a.chunk.ingested_at < b.chunk.ingested_at;
    return a.chunk.chunk_id < b.chunk.chunk_id;
}

KnowledgeStore::KnowledgeStore(std::shared_ptr<const EmbeddingProvider> embedder, StoreOptions options)
    : embedder_(std::move(embedder)), options_(std::move(options)) {
    if (!embedder_) throw Error(Errc::InvalidArgument, "knowledge store needs an embedding provider");
}

std::string KnowledgeStore::next_chunk_id(const std::string& doc_id) const {
    auto it = doc_chunk_counts_.find(doc_id);
    std::size_t seq = it == doc_chunk_counts_.end() ? 0 : it->second;
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%05zu", seq);
    return doc_id + buf;
}

Vector KnowledgeStore::embed_checked(std::string_view text) const {
    Vector v;
    try {
        v = embedder_->embed(text);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(Errc::EmbeddingProviderFailure, e.what());
    }
    if (v.size() != embedder_->dimension()) {
        throw Error(Errc::EmbeddingProviderFailure, "provider returned wrong dimension");
    }
    return v;
}

std::vector<std::string> KnowledgeStore::ingest_document(const std::string& doc_id, std::string_view text,
                                                         Tier tier, Timestamp now) {
    if (text::trim(text).empty()) throw Error(Errc::EmptyDocument, doc_id);
    if (doc_id.empty()) throw Error(Errc::InvalidArgument, "empty doc id");
    if ((tier == Tier::ExpertFAQ) != (doc_id == options_.faq_doc_id)) {
        throw Error(Errc::InvalidArgument, "only '" + options_.faq_doc_id + "' may use the expert-FAQ tier");
    }
    auto pieces = chunk_document(text, options_.chunk_budget);

    // embed outside the writer lock; the provider may be slow
    std::vector<Vector> vectors;
    vectors.reserve(pieces.size());
    for (const auto& p : pieces) vectors.push_back(embed_checked(p));

    std::unique_lock lock(mutex_);
    if (doc_chunk_counts_.count(doc_id)) throw Error(Errc::DuplicateDocument, doc_id);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        KnowledgeChunk c{next_chunk_id(doc_id), doc_id, pieces[i], std::move(vectors[i]), tier, now};
        ids.push_back(c.chunk_id);
        chunks_.push_back(std::move(c));
        ++doc_chunk_counts_[doc_id];
    }
    return ids;
}

SearchResult KnowledgeStore::search(std::string_view query_text, std::size_t k) const {
    if (k == 0) throw Error(Errc::InvalidArgument, "k must be positive");
    Vector q = embed_checked(query_text);

    std::shared_lock lock(mutex_);
    std::vector<ScoredChunk> scored;
    scored.reserve(chunks_.size());
    for (const auto& c : chunks_) scored.push_back({c, cosine_similarity(q, c.embedding)});
    lock.unlock();

    auto top = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(top), scored.end(),
                      ranks_before);
    SearchResult result;
    for (std::size_t i = 0; i < top; ++i) {
        auto& bucket = scored[i].chunk.tier == Tier::Raw ? result.raw_chunks : result.faq_chunks;
        bucket.push_back(std::move(scored[i]));
    }
    return result;
}

std::size_t KnowledgeStore::append_faq_entries(const std::vector<FaqEntry>& entries, Timestamp now) {
    if (entries.empty()) throw Error(Errc::InvalidArgument, "no FAQ entries to append");
    std::vector<std::string> texts;
    for (const auto& e : entries) {
        if (text::trim(e.question).empty() || text::trim(e.answer).empty()) {
            throw Error(Errc::InvalidArgument, "FAQ entry needs a question and an answer");
        }
        texts.push_back(format_faq_entry(e));
    }
    std::vector<Vector> vectors;
    for (const auto& t : texts) vectors.push_back(embed_checked(t));

    std::unique_lock lock(mutex_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        chunks_.push_back({next_chunk_id(options_.faq_doc_id), options_.faq_doc_id, texts[i],
                           std::move(vectors[i]), Tier::ExpertFAQ, now});
        ++doc_chunk_counts_[options_.faq_doc_id];
    }
    return texts.size();
}

std::vector<KnowledgeChunk> KnowledgeStore::chunks() const {
    std::shared_lock lock(mutex_);
    return chunks_;
}

std::size_t KnowledgeStore::chunk_count() const {
    std::shared_lock lock(mutex_);
    return chunks_.size();
}

std::size_t KnowledgeStore::chunk_count(Tier tier) const {
    std::shared_lock lock(mutex_);
    return static_cast<std::size_t>(
        std::count_if(chunks_.begin(), chunks_.end(), [tier](const auto& c) { return c.tier == tier; }));
}

bool KnowledgeStore::has_document(const std::string& doc_id) const {
    std::shared_lock lock(mutex_);
    return doc_chunk_counts_.count(doc_id) > 0;
}

}  // namespace expertloop::knowledge
