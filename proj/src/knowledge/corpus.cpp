#include "expertloop/knowledge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"

namespace expertloop::knowledge {

namespace fs = std::filesystem;

std::vector<CorpusDocument> load_corpus(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(Errc::InvalidArgument, "corpus directory not found: " + dir.string());

    nlohmann::json manifest = nlohmann::json::object();
    if (auto path = dir / "manifest.json"; fs::exists(path)) {
        std::ifstream in(path);
        try {
            manifest = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::InvalidArgument, "bad corpus manifest: " + std::string(e.what()));
        }
    }

    std::vector<CorpusDocument> docs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        CorpusDocument doc;
        doc.doc_id = entry.path().stem().string();
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        doc.text = ss.str();
        if (manifest.contains(doc.doc_id)) {
            doc.tier = parse_tier(manifest[doc.doc_id].get<std::string>());
        } else {
            doc.tier = doc.doc_id == kExpertFaqDocId ? Tier::ExpertFAQ : Tier::Raw;
        }
        docs.push_back(std::move(doc));
    }
    std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
    return docs;
}

std::size_t ingest_corpus(KnowledgeStore& store, const std::vector<CorpusDocument>& docs, Timestamp now) {
    std::size_t n = 0;
    for (const auto& doc : docs) {
        if (text::trim(doc.text).empty()) continue;
        n += store.ingest_document(doc.doc_id, doc.text, doc.tier, now).size();
    }
    return n;
}

}  // namespace expertloop::knowledge
