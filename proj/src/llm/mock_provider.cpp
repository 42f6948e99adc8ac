#include <algorithm>
#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"
#include "expertloop/llm/completion_provider.hpp"

namespace expertloop::llm {

namespace {

const std::set<std::string, std::less<>> kStopWords{
    "a",     "an",    "the",   "is",    "are",   "was",   "were",  "be",    "been",   "am",    "do",   "does",
    "did",   "i",     "me",    "my",    "you",   "your",  "we",    "our",   "it",     "its",   "this", "that",
    "these", "those", "to",    "of",    "in",    "on",    "at",    "for",   "from",   "by",    "with", "and",
    "or",    "but",   "if",    "so",    "as",    "can",   "could", "will",  "would",  "should", "may", "might",
    "must",  "shall", "what",  "when",  "where", "which", "who",   "whom",  "why",    "how",   "many", "much",
    "after", "before", "there", "their", "they", "them",  "he",    "she",   "his",    "her",   "not",  "no",
    "any",   "some",  "all",   "about", "into",  "than",  "then",  "also",  "have",   "has",   "had",  "get",
    "please", "just", "very",  "up",    "out",   "over",  "under", "again", "s",      "t",
};

std::string stem(std::string w) {
    if (w.size() > 5 && w.ends_with("ing")) {
        w.resize(w.size() - 3);
        return w;
    }
    if (w.size() > 4 && w.ends_with("ies")) {
        w.resize(w.size() - 3);
        return w + "y";
    }
    if (w.size() > 3 && w.ends_with('s') && !w.ends_with("ss")) w.pop_back();
    return w;
}

std::vector<std::string> raw_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '-' || u >= 0x80) {
            cur += static_cast<char>(std::tolower(u));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::size_t overlap(const std::vector<std::string>& query_words, std::string_view sentence) {
    auto words = content_words(sentence);
    std::set<std::string> have(words.begin(), words.end());
    std::set<std::string> q(query_words.begin(), query_words.end());
    return static_cast<std::size_t>(std::count_if(q.begin(), q.end(), [&](const auto& w) { return have.count(w); }));
}

// Text between `start` marker and the next `end` marker (or end of input).
std::string section(std::string_view prompt, std::string_view start, std::string_view end) {
    auto b = prompt.find(start);
    if (b == std::string_view::npos) return {};
    b += start.size();
    auto e = end.empty() ? std::string_view::npos : prompt.find(end, b);
    return std::string(prompt.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
}

std::string json_list(const std::vector<std::string>& items) { return nlohmann::json(items).dump(); }

struct FaqPair {
    std::string question;
    std::string answer;
};

std::vector<FaqPair> faq_pairs(std::string_view block) {
    std::vector<FaqPair> out;
    for (const auto& raw_line : text::split(block, '\n')) {
        auto line = text::trim(raw_line);
        if (line.starts_with("Q: ")) {
            out.push_back({line.substr(3), {}});
        } else if (line.starts_with("A: ") && !out.empty() && out.back().answer.empty()) {
            out.back().answer = line.substr(3);
        }
    }
    std::erase_if(out, [](const auto& p) { return p.answer.empty(); });
    return out;
}

std::string gerund(std::string verb) {
    if (verb.ends_with("ie")) return verb.substr(0, verb.size() - 2) + "ying";
    if (verb.size() > 2 && verb.ends_with('e') && !verb.ends_with("ee")) return verb.substr(0, verb.size() - 1) + "ing";
    auto vowel = [](char c) { return std::string_view("aeiou").find(c) != std::string_view::npos; };
    if (verb.size() == 3 && !vowel(verb[0]) && vowel(verb[1]) && !vowel(verb[2]) &&
        std::string_view("wxy").find(verb[2]) == std::string_view::npos)
        return verb + verb.back() + "ing";
    return verb + "ing";
}

// "How many days after surgery can I wash my hair?" -> "washing your hair".
std::string action_phrase(std::string_view query) {
    auto words = text::split(text::trim(query), ' ');
    for (auto& w : words) {
        while (!w.empty() && std::ispunct(static_cast<unsigned char>(w.back()))) w.pop_back();
    }
    static const std::set<std::string, std::less<>> kModals{"can", "could", "should", "may", "shall"};
    for (std::size_t i = 0; i + 2 < words.size(); ++i) {
        if (kModals.count(text::to_lower_ascii(words[i])) && text::to_lower_ascii(words[i + 1]) == "i") {
            std::vector<std::string> phrase{gerund(text::to_lower_ascii(words[i + 2]))};
            for (std::size_t j = i + 3; j < words.size(); ++j) {
                auto lw = text::to_lower_ascii(words[j]);
                if (lw == "after" || lw == "before" || lw == "during" || lw == "when") break;
                if (lw == "my") lw = "your";
                else if (lw == "i") lw = "you";
                else lw = words[j];
                phrase.push_back(lw);
            }
            return text::join(phrase, " ");
        }
    }
    return {};
}

std::string sentence_case(std::string s) {
    s = text::trim(s);
    while (s.size() > 1 && s.ends_with("..")) s.pop_back();
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    if (!s.empty() && s.back() != '.' && s.back() != '!' && s.back() != '?') s += '.';
    return s;
}

}  // namespace

std::vector<std::string> content_words(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : raw_tokens(text)) {
        if (kStopWords.count(t)) continue;
        out.push_back(stem(std::move(t)));
    }
    return out;
}

std::string MockCompletionProvider::complete(const PromptBundle& bundle) {
    switch (bundle.task) {
        case PromptTask::ResponseGeneration: return generate_response(bundle);
        case PromptTask::RelatedQuestions: return generate_related(bundle);
        case PromptTask::FinalResponse: return generate_final(bundle);
        case PromptTask::Shorten: return generate_short(bundle);
    }
    throw Error(Errc::ProviderFailure, "unknown prompt task");
}

std::string MockCompletionProvider::generate_response(const PromptBundle& bundle) const {
    const std::string& p = bundle.query_prompt;
    auto raw = section(p, "Raw documents are as follows:\n        ", "\n    New documents are as follows:");
    auto faq = section(p, "New documents are as follows:\n        ", "\n    The most recent conversations are here:");
    auto query = text::trim(section(p, "You are asked the following query:\n        ", "\n\nEnsure that the query type"));

    auto lower = text::to_lower_ascii(query);
    auto tokens = raw_tokens(query);
    std::string type = "medical";
    bool logistics = std::any_of(options_.logistics_keywords.begin(), options_.logistics_keywords.end(),
                                 [&](const auto& k) { return lower.find(k) != std::string::npos; });
    bool greeting = query.find('?') == std::string::npos &&
                    std::any_of(options_.greeting_keywords.begin(), options_.greeting_keywords.end(), [&](const auto& k) {
                        return std::any_of(tokens.begin(), tokens.end(),
                                           [&](const auto& t) { return t == k || (k.size() > 3 && t.starts_with(k)); });
                    });
    if (logistics) type = "logistical";
    else if (greeting) type = "small-talk";

    std::string response;
    if (type == "small-talk") {
        bool thanks = std::any_of(tokens.begin(), tokens.end(), [](const auto& t) { return t.starts_with("thank"); }) ||
                      lower.find("got it") != std::string::npos || lower.find("understand") != std::string::npos;
        response = thanks ? "You're welcome! I am glad the information was helpful."
                          : "Hello! I am here to help with your cataract surgery questions. What would you like to know?";
    } else {
        auto qwords = content_words(query);
        std::size_t best = 0;
        std::string best_sentence;
        for (const auto& s : text::sentences(raw)) {
            if (s.ends_with('?')) continue;  // a question in the corpus is not an answer
            auto score = overlap(qwords, s);
            if (score > best) {
                best = score;
                best_sentence = s;
            }
        }
        // expert-approved entries win ties against raw text
        std::size_t best_faq = 0;
        std::string faq_answer;
        for (const auto& pair : faq_pairs(faq)) {
            auto score = overlap(qwords, pair.question);
            if (score > best_faq) {
                best_faq = score;
                faq_answer = pair.answer;
            }
        }
        // a passage answers the query only if it covers half its content words
        std::size_t needed = std::max<std::size_t>(1, (qwords.size() + 1) / 2);
        if (best_faq >= needed && best_faq >= best) response = faq_answer;
        else if (best >= needed) response = best_sentence;
        else response = std::string(kUnknownAnswer);
    }
    return nlohmann::json{{"response", response}, {"query_type", type}}.dump();
}

std::string MockCompletionProvider::generate_related(const PromptBundle& bundle) const {
    const std::string& p = bundle.query_prompt;
    auto query = text::to_lower_ascii(section(p, "A patient asked the following query:\n", "\nA chatbot answered"));
    struct Topic {
        std::string_view keyword;
        std::vector<std::string> questions;
    };
    static const std::vector<Topic> kTopics{
        {"hair",
         {"When can I take a full head bath after surgery?", "Can I wash my face after cataract surgery?",
          "How do I keep water away from my eye while bathing?"}},
        {"wash",
         {"When can I take a full head bath after surgery?", "Can I wash my face after cataract surgery?",
          "How do I keep water away from my eye while bathing?"}},
        {"drop",
         {"How many times a day should I use the eye drops?", "What if I miss a dose of my eye drops?",
          "How long do I need to continue the eye drops?"}},
        {"pain",
         {"Is some discomfort normal after cataract surgery?", "Which painkillers are safe after the surgery?",
          "When should I call the doctor about eye pain?"}},
        {"insurance",
         {"Which documents are needed for an insurance claim?", "Does insurance cover the lens cost?",
          "How long does insurance approval take?"}},
        {"payment",
         {"What payment methods does the hospital accept?", "Can I pay the surgery cost in installments?",
          "Where is the billing counter?"}},
        {"document",
         {"Do I need to bring my previous medical reports?", "Is a photocopy of my ID proof enough?",
          "Which documents are needed for an insurance claim?"}},
        {"admission",
         {"What time should I arrive for admission?", "Can a family member stay with me?",
          "Do I need to fast before the surgery?"}},
        {"discharge",
         {"When will I be discharged after surgery?", "What should I do after going home?",
          "When is my follow-up appointment?"}},
        {"surgery",
         {"How long is the recovery time after cataract surgery?", "Will I feel any pain during the surgery?",
          "What are the risks associated with cataract surgery?"}},
    };
    for (const auto& topic : kTopics) {
        if (query.find(topic.keyword) != std::string::npos) return json_list(topic.questions);
    }
    return json_list({"How should I care for my eye after cataract surgery?",
                      "When is my follow-up appointment?", "Which activities should I avoid after surgery?"});
}

std::string MockCompletionProvider::generate_final(const PromptBundle& bundle) const {
    const std::string& p = bundle.query_prompt;
    auto query = text::trim(section(p, "A cataract patient asked the following query:\n", "\nA cataract chatbot answered"));
    auto response =
        text::trim(section(p, "A cataract chatbot answered the following:\n", "\nA doctor corrected the response"));
    auto correction = text::trim(section(p, "A doctor corrected the response as follows:\n", ""));
    if (correction == response) return response;

    std::vector<std::string> words;
    for (auto& w : text::split(correction, ' ')) {
        if (w.empty()) continue;
        std::size_t end = w.size();
        while (end > 0 && std::ispunct(static_cast<unsigned char>(w[end - 1]))) --end;
        std::string core = w.substr(0, end);
        std::string tail = w.substr(end);
        auto it = options_.abbreviations.find(text::to_lower_ascii(core));
        if (it != options_.abbreviations.end()) core = it->second;
        words.push_back(core + tail);
    }

    auto lower_tokens = [](const std::vector<std::string>& ws) {
        std::vector<std::string> out;
        for (const auto& w : ws) out.push_back(text::to_lower_ascii(raw_tokens(w).empty() ? w : raw_tokens(w)[0]));
        return out;
    };

    auto qwords = content_words(query);
    auto cwords = content_words(text::join(words, " "));
    bool shares_subject = std::any_of(cwords.begin(), cwords.end(), [&](const auto& w) {
        return std::find(qwords.begin(), qwords.end(), w) != qwords.end();
    });

    if (!shares_subject && !words.empty()) {
        auto lw = lower_tokens(words);
        if (lw[0] == "better" && lw.size() > 1 && lw[1] != "to") {
            words.insert(words.begin() + 1, "to");
            lw.insert(lw.begin() + 1, "to");
        }
        static const std::set<std::string, std::less<>> kInstruction{"avoid", "stop",  "start",
                                                                     "resume", "wait", "continue"};
        static const std::set<std::string, std::less<>> kBareFollowers{"for", "until", "till", "during"};
        auto phrase = action_phrase(query);
        for (std::size_t i = 0; i < lw.size() && !phrase.empty(); ++i) {
            // only when the verb has no object of its own ("avoid for 2 weeks")
            bool bare = i + 1 == lw.size() || kBareFollowers.count(lw[i + 1]) ||
                        std::isdigit(static_cast<unsigned char>(lw[i + 1][0]));
            if (kInstruction.count(lw[i]) && bare) {
                // strip trailing punctuation from the verb before inserting
                std::string& verb = words[i];
                std::string tail;
                while (!verb.empty() && std::ispunct(static_cast<unsigned char>(verb.back()))) {
                    tail.insert(tail.begin(), verb.back());
                    verb.pop_back();
                }
                words.insert(words.begin() + static_cast<std::ptrdiff_t>(i) + 1, phrase + tail);
                break;
            }
        }
        auto joined = text::trim(text::join(words, " "));
        while (!joined.empty() && std::ispunct(static_cast<unsigned char>(joined.back()))) joined.pop_back();
        auto lq = text::to_lower_ascii(query);
        if (lq.find("after surgery") != std::string::npos || lq.find("after the surgery") != std::string::npos) {
            joined += " after the cataract surgery";
        }
        return sentence_case(joined);
    }
    return sentence_case(text::join(words, " "));
}

std::string MockCompletionProvider::generate_short(const PromptBundle& bundle) const {
    auto response = text::trim(section(bundle.query_prompt, "You are given the following response:\n", ""));
    std::string out;
    for (const auto& s : text::sentences(response)) {
        std::string next = out.empty() ? s : out + " " + s;
        if (text::char_count(next) > text::kMessageLimit) break;
        out = std::move(next);
    }
    if (out.empty()) out = text::truncate_at_sentence(response, text::kMessageLimit);
    return out;
}

}  // namespace expertloop::llm
