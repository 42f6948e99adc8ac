#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"
#include "expertloop/knowledge/chunker.hpp"
#include "expertloop/knowledge/corpus.hpp"
#include "expertloop/knowledge/knowledge_store.hpp"
#include "support/retrieval_oracle.hpp"

using namespace expertloop;
using namespace expertloop::knowledge;
using oracle::brute_force_top_k;
using oracle::merged_ids;

namespace {

const Timestamp kT0 = parse_rfc3339("2023-11-01T00:00:00Z");

std::string para(char fill, std::size_t n) {
    std::string s;
    while (s.size() < n) {
        s += fill;
        s += fill;
        s += fill;
        s += ' ';
    }
    s.resize(n);
    s.back() = '.';
    return s;
}

std::shared_ptr<const EmbeddingProvider> bow() { return std::make_shared<HashedBagOfWordsEmbedder>(64); }

}  // namespace

TEST(Chunker, TwelveHundredCharFixtureMakesThreeChunks) {
    // Hand-applied rule, budget 500: P1(240)+P2(240)+sep = 482 fits, adding P3 does not.
    // Carry P2 + P3(480) = 722 > 500 so chunk 2 is P3 alone; carry P3 + P4(232) > 500 so
    // chunk 3 is P4 alone.
    std::string doc = para('a', 240) + "\n\n" + para('b', 240) + "\n\n" + para('c', 480) + "\n\n" + para('d', 232);
    ASSERT_EQ(doc.size(), 1198u);
    auto chunks = chunk_document(doc, 500);
    ASSERT_EQ(chunks.size(), 3u);
    EXPECT_EQ(chunks[0], para('a', 240) + "\n\n" + para('b', 240));
    EXPECT_EQ(chunks[1], para('c', 480));
    EXPECT_EQ(chunks[2], para('d', 232));
}

TEST(Chunker, RepeatsLastParagraphWhenItFits) {
    // five 150-char paragraphs: [1,2,3] (454), then carry 3 -> [3,4,5] (454)
    std::string doc;
    for (char c : std::string("abcde")) doc += para(c, 150) + "\n\n";
    auto chunks = chunk_document(doc, 500);
    ASSERT_EQ(chunks.size(), 2u);
    EXPECT_EQ(chunks[1].substr(0, 150), para('c', 150));
    EXPECT_EQ(chunks[1].substr(chunks[1].size() - 150), para('e', 150));
}

TEST(Chunker, OversizedParagraphIsCutAndEveryChunkFits) {
    std::string longpara;
    for (int i = 0; i < 60; ++i) longpara += "Sentence number " + std::to_string(i) + " is here. ";
    auto chunks = chunk_document(longpara, 500);
    EXPECT_GT(chunks.size(), 1u);
    for (const auto& c : chunks) EXPECT_LE(text::char_count(c), 500u);
}

TEST(KnowledgeStore, IngestReturnsIdsInDocumentOrder) {
    KnowledgeStore store(bow());
    std::string doc = para('a', 240) + "\n\n" + para('b', 240) + "\n\n" + para('c', 480) + "\n\n" + para('d', 232);
    auto ids = store.ingest_document("postop-guide", doc, Tier::Raw, kT0);
    ASSERT_EQ(ids.size(), 3u);
    EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
    EXPECT_EQ(store.chunk_count(), 3u);
}

TEST(KnowledgeStore, RejectsEmptyAndDuplicateDocuments) {
    KnowledgeStore store(bow());
    try {
        store.ingest_document("faq", "", Tier::ExpertFAQ, kT0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyDocument);
    }
    store.ingest_document("postop-guide", "Some text.", Tier::Raw, kT0);
    try {
        store.ingest_document("postop-guide", "Other text.", Tier::Raw, kT0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DuplicateDocument);
    }
}

TEST(KnowledgeStore, TierMustMatchDesignatedFaqDocument) {
    KnowledgeStore store(bow());
    EXPECT_THROW(store.ingest_document("postop", "x y", Tier::ExpertFAQ, kT0), Error);
    EXPECT_THROW(store.ingest_document("expert-faq", "x y", Tier::Raw, kT0), Error);
}

TEST(KnowledgeStore, EmptyStoreSearchIsEmpty) {
    KnowledgeStore store(bow());
    auto r = store.search("anything", 3);
    EXPECT_TRUE(r.raw_chunks.empty());
    EXPECT_TRUE(r.faq_chunks.empty());
    EXPECT_THROW(store.search("anything", 0), Error);
}

TEST(KnowledgeStore, SelfSimilarityRanksFirst) {
    KnowledgeStore store(bow());
    store.ingest_document("a", "Avoid rubbing the eye after surgery.", Tier::Raw, kT0);
    store.ingest_document("b", "Use the prescribed eye drops four times a day.", Tier::Raw, kT0);
    auto r = store.search("Use the prescribed eye drops four times a day.", 3);
    ASSERT_FALSE(r.raw_chunks.empty());
    EXPECT_EQ(r.raw_chunks[0].chunk.doc_id, "b");
    EXPECT_NEAR(r.raw_chunks[0].score, 1.0, 1e-9);
}

TEST(KnowledgeStore, TenChunkStoreMatchesBruteForce) {
    KnowledgeStore store(bow());
    const char* docs[] = {"eye drops four times daily", "avoid water in the eye",   "surgery takes twenty minutes",
                          "bring your insurance card",  "no driving for one week",  "wear the eye shield at night",
                          "light meals before surgery", "avoid dust and smoke",     "follow up visit after a week",
                          "report pain or redness"};
    for (int i = 0; i < 10; ++i) store.ingest_document("d" + std::to_string(i), docs[i], Tier::Raw, kT0);
    const std::string q = "how long does the eye surgery take";
    auto r = store.search(q, 3);
    EXPECT_EQ(merged_ids(r), brute_force_top_k(store.chunks(), bow()->embed(q), 3));
}

TEST(KnowledgeStore, TieBreakPrefersOlderThenChunkId) {
    KnowledgeStore store(bow());
    store.ingest_document("z-old", "same words here", Tier::Raw, kT0);
    store.ingest_document("a-new", "same words here", Tier::Raw, kT0 + Seconds(5));
    store.ingest_document("m-old", "same words here", Tier::Raw, kT0);
    auto r = store.search("same words here", 3);
    ASSERT_EQ(r.raw_chunks.size(), 3u);
    EXPECT_EQ(r.raw_chunks[0].chunk.doc_id, "m-old");
    EXPECT_EQ(r.raw_chunks[1].chunk.doc_id, "z-old");
    EXPECT_EQ(r.raw_chunks[2].chunk.doc_id, "a-new");
}

TEST(KnowledgeStore, AppendFaqEntryIsSearchableInFaqTier) {
    KnowledgeStore store(bow());
    store.ingest_document("postop", "Use eye drops as prescribed.\n\nAvoid dusty places.", Tier::Raw, kT0);
    auto n = store.append_faq_entries(
        {{"Can I wash my hair after surgery?",
          "Better to avoid washing your hair for 2 weeks after the cataract surgery."}},
        kT0 + Seconds(10));
    EXPECT_EQ(n, 1u);
    auto r = store.search("wash hair", 3);
    ASSERT_FALSE(r.faq_chunks.empty());
    EXPECT_EQ(r.faq_chunks[0].chunk.text,
              "Q: Can I wash my hair after surgery?\nA: Better to avoid washing your hair for 2 weeks after the "
              "cataract surgery.");
    EXPECT_EQ(r.faq_chunks[0].chunk.tier, Tier::ExpertFAQ);
}

TEST(KnowledgeStore, AppendCountsAndNeverTouchesExistingChunks) {
    KnowledgeStore store(bow());
    store.ingest_document("postop", "Use eye drops as prescribed.", Tier::Raw, kT0);
    store.append_faq_entries({{"q0?", "a0."}}, kT0);
    auto before = store.chunks();
    auto faq_before = store.chunk_count(Tier::ExpertFAQ);
    std::vector<FaqEntry> five;
    for (int i = 1; i <= 5; ++i) five.push_back({"q" + std::to_string(i) + "?", "a" + std::to_string(i) + "."});
    EXPECT_EQ(store.append_faq_entries(five, kT0 + Seconds(1)), 5u);
    EXPECT_EQ(store.chunk_count(Tier::ExpertFAQ), faq_before + 5);
    auto after = store.chunks();
    for (std::size_t i = 0; i < before.size(); ++i) {
        EXPECT_EQ(after[i].chunk_id, before[i].chunk_id);
        EXPECT_EQ(after[i].text, before[i].text);
    }
    EXPECT_THROW(store.append_faq_entries({}, kT0), Error);
    EXPECT_THROW(store.append_faq_entries({{"", "x"}}, kT0), Error);
}

TEST(KnowledgeStore, RandomCorporaAgreeWithBruteForce) {
    std::mt19937 rng(2024);
    const std::vector<std::string> vocab{"eye",   "drops", "surgery", "lens",  "water", "pain",  "rest",
                                         "diet",  "night", "shield",  "dust",  "drive", "week",  "doctor",
                                         "visit", "blur",  "light",   "sleep", "bath",  "insurance"};
    for (int trial = 0; trial < 30; ++trial) {
        KnowledgeStore store(bow());
        std::size_t n = 1 + rng() % 200;
        for (std::size_t i = 0; i < n; ++i) {
            std::string text;
            std::size_t words = 1 + rng() % 4;
            for (std::size_t w = 0; w < words; ++w) text += vocab[rng() % vocab.size()] + " ";
            bool faq = rng() % 5 == 0;
            if (faq) {
                store.append_faq_entries({{text, "ok"}}, kT0 + Seconds(rng() % 3));
            } else {
                store.ingest_document("doc" + std::to_string(i), text, Tier::Raw, kT0 + Seconds(rng() % 3));
            }
        }
        std::string q = vocab[rng() % vocab.size()] + " " + vocab[rng() % vocab.size()];
        std::size_t k = 1 + rng() % 5;
        auto r = store.search(q, k);
        auto all = store.chunks();
        EXPECT_EQ(merged_ids(r), brute_force_top_k(all, bow()->embed(q), k)) << "trial " << trial;
        EXPECT_LE(r.size(), k);
        for (const auto& list : {r.raw_chunks, r.faq_chunks}) {
            EXPECT_TRUE(std::is_sorted(list.begin(), list.end(), ranks_before));
            for (const auto& s : list) {
                EXPECT_GE(s.score, -1.0 - 1e-12);
                EXPECT_LE(s.score, 1.0 + 1e-12);
            }
        }
    }
}

TEST(Corpus, LoadsManifestTiers) {
    auto docs = load_corpus(EXPERTLOOP_DATA_DIR "/corpus");
    ASSERT_FALSE(docs.empty());
    EXPECT_TRUE(std::is_sorted(docs.begin(), docs.end(),
                               [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; }));
    for (const auto& d : docs) {
        EXPECT_EQ(d.tier == Tier::ExpertFAQ, d.doc_id == kExpertFaqDocId);
    }
    KnowledgeStore store(bow());
    EXPECT_GT(ingest_corpus(store, docs, kT0), 0u);
}
