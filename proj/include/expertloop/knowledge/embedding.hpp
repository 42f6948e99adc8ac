#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace expertloop::knowledge {

using Vector = std::vector<double>;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::size_t dimension() const = 0;

    // Throws Error(EmbeddingProviderFailure) on provider errors.
    virtual Vector embed(std::string_view text) const = 0;
};

// Deterministic test embedder: lower-cased alphanumeric tokens, minus common
// English function words, hashed (FNV-1a) into a fixed number of buckets,
// term-frequency weighted, then L2-normalised. Identical texts embed identically; word order is ignored.
class HashedBagOfWordsEmbedder final : public EmbeddingProvider {
public:
    explicit HashedBagOfWordsEmbedder(std::size_t dimension = 64) : dimension_(dimension) {}

    std::size_t dimension() const override { return dimension_; }
    Vector embed(std::string_view text) const override;

private:
    std::size_t dimension_;
};

double cosine_similarity(const Vector& a, const Vector& b);

// Embedding providers by configuration key ("hashed-bow").
std::unique_ptr<EmbeddingProvider> make_embedding_provider(std::string_view key, std::size_t dimension = 64);

}  // namespace expertloop::knowledge
