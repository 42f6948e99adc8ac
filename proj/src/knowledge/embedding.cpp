#include "expertloop/knowledge/embedding.hpp"

#include <cmath>
#include <cstdint>
#include <set>
#include <string>

#include "expertloop/core/error.hpp"

namespace expertloop::knowledge {

namespace {

bool is_token_char(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Function words carry no topical signal and would otherwise dominate
// short queries.
const std::set<std::string, std::less<>>& stop_words() {
    static const std::set<std::string, std::less<>> words{
        "a",    "an",   "the",  "and",  "or",   "but",  "of",   "to",    "in",   "on",   "at",   "for",
        "by",   "with", "from", "is",   "are",  "was",  "be",   "been",  "it",   "its",  "this", "that",
        "i",    "me",   "my",   "you",  "your", "we",   "our",  "he",    "she",  "they", "them", "can",
        "could", "will", "would", "should", "shall", "may", "do", "does", "did", "how", "what", "when",
        "where", "which", "who", "why", "if",  "so",   "as",   "am",    "not",  "no",   "any",  "there"};
    return words;
}

}  // namespace

Vector HashedBagOfWordsEmbedder::embed(std::string_view text) const {
    Vector v(dimension_, 0.0);
    std::string token;
    auto flush = [&] {
        if (!token.empty() && !stop_words().count(token)) v[fnv1a(token) % dimension_] += 1.0;
        token.clear();
    };
    for (unsigned char c : text) {
        if (is_token_char(c)) {
            token += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
        } else {
            flush();
        }
    }
    flush();
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

double cosine_similarity(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw Error(Errc::InvalidArgument, "embedding dimension mismatch");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(std::string_view key, std::size_t dimension) {
    if (key == "hashed-bow" || key == "mock") {
        return std::make_unique<HashedBagOfWordsEmbedder>(dimension);
    }
    throw Error(Errc::InvalidArgument, "unknown embedding provider '" + std::string(key) + "'");
}

}  // namespace expertloop::knowledge
