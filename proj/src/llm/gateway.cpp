#include "expertloop/llm/gateway.hpp"

#include <algorithm>
#include <thread>

#include <nlohmann/json.hpp>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"

namespace expertloop::llm {

namespace {

// Reads a quoted literal starting at s[i] (the quote char); advances i past it.
std::string read_quoted(std::string_view s, std::size_t& i) {
    char quote = s[i++];
    std::string out;
    while (i < s.size() && s[i] != quote) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            char n = s[i + 1];
            out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
            i += 2;
            continue;
        }
        out += s[i++];
    }
    if (i < s.size()) ++i;
    return out;
}

}  // namespace

std::vector<std::string> parse_string_list(std::string_view raw) {
    auto open = raw.find('[');
    auto close = raw.rfind(']');
    if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
        auto body = raw.substr(open, close - open + 1);
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (!j.is_discarded() && j.is_array()) {
            std::vector<std::string> out;
            for (const auto& item : j) {
                if (item.is_string()) out.push_back(item.get<std::string>());
            }
            return out;
        }
        // python repr: single or double quotes
        std::vector<std::string> out;
        std::size_t i = 1;
        while (i < body.size()) {
            if (body[i] == '\'' || body[i] == '"') out.push_back(read_quoted(body, i));
            else ++i;
        }
        return out;
    }
    // bare lines, possibly numbered or bulleted
    std::vector<std::string> out;
    for (const auto& line : text::split(raw, '\n')) {
        auto t = text::trim(line);
        std::size_t k = 0;
        while (k < t.size() && (std::isdigit(static_cast<unsigned char>(t[k])) || t[k] == '.' || t[k] == ')' ||
                                t[k] == '-' || t[k] == '*' || t[k] == ' '))
            ++k;
        t = t.substr(k);
        if (!t.empty() && t.back() == '?') out.push_back(t);
    }
    return out;
}

AnswerGeneration parse_answer_generation(std::string_view raw) {
    auto open = raw.find('{');
    auto close = raw.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw Error(Errc::MalformedOutput, "no JSON object in provider output");
    }
    auto j = nlohmann::json::parse(raw.substr(open, close - open + 1), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(Errc::MalformedOutput, "provider output is not a JSON object");
    auto response = j.find("response");
    if (response == j.end() || !response->is_string() || text::trim(response->get<std::string>()).empty()) {
        throw Error(Errc::MalformedOutput, "missing response field");
    }
    AnswerGeneration out;
    out.english_answer = text::trim(response->get<std::string>());
    out.is_unknown = out.english_answer == kUnknownAnswer;

    std::string label;
    if (auto qt = j.find("query_type"); qt != j.end() && qt->is_string()) label = text::to_lower_ascii(text::trim(qt->get<std::string>()));
    if (label == "medical") out.query_type = QueryType::Medical;
    else if (label == "logistical") out.query_type = QueryType::Logistical;
    else if (label == "small-talk" || label == "small talk" || label == "smalltalk") out.query_type = QueryType::SmallTalk;
    else out.query_type = QueryType::Other;

    // an "I don't know" always goes to an expert
    if (out.is_unknown && out.query_type != QueryType::Logistical) out.query_type = QueryType::Medical;
    return out;
}

LlmGateway::LlmGateway(std::shared_ptr<CompletionProvider> provider, GatewayConfig config, Sleeper sleeper)
    : provider_(std::move(provider)), config_(std::move(config)), sleeper_(std::move(sleeper)) {
    if (!provider_) throw Error(Errc::InvalidArgument, "gateway needs a provider");
    if (!sleeper_) sleeper_ = [](Seconds s) { std::this_thread::sleep_for(s); };
}

std::string LlmGateway::call(const PromptBundle& bundle) {
    Seconds backoff = config_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            if (provider_->requires_serialization()) {
                std::lock_guard lock(provider_mutex_);
                return provider_->complete(bundle);
            }
            return provider_->complete(bundle);
        } catch (const Error& e) {
            if (e.code() != Errc::ProviderFailure || attempt >= config_.max_retries) throw;
        }
        sleeper_(backoff);
        backoff *= 2;
    }
}

AnswerGeneration LlmGateway::answer_query(std::string_view query, const std::vector<std::string>& raw_chunks,
                                          const std::vector<std::string>& faq_chunks, const std::vector<Turn>& history) {
    if (text::trim(query).empty()) throw Error(Errc::InvalidArgument, "empty query");
    std::vector<Turn> recent(history.end() - static_cast<std::ptrdiff_t>(std::min(history.size(), config_.history_turns)),
                             history.end());
    auto bundle = response_generation_prompt(raw_chunks, faq_chunks, recent, query);
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            return parse_answer_generation(call(bundle));
        } catch (const Error& e) {
            if (e.code() != Errc::MalformedOutput) throw;
        }
    }
    return {std::string(kUnknownAnswer), QueryType::Other, true};
}

std::vector<std::string> LlmGateway::related_questions(std::string_view query, std::string_view answer) {
    auto raw = call(related_questions_prompt(query, answer));
    std::vector<std::string> out;
    auto add = [&](std::string_view q) {
        auto fitted = text::truncate_words_with_ellipsis(q, text::kSuggestionLimit - 3);
        if (fitted.empty() || out.size() >= 3) return;
        if (std::find(out.begin(), out.end(), fitted) != out.end()) return;
        out.push_back(std::move(fitted));
    };
    for (const auto& q : parse_string_list(raw)) add(q);
    for (const auto& q : config_.fallback_questions) add(q);
    return out;
}

std::string LlmGateway::merge_correction(std::string_view query, std::string_view bot_answer,
                                         std::string_view correction) {
    auto out = text::trim(call(final_response_prompt(query, bot_answer, correction)));
    return out.empty() ? text::trim(correction) : out;
}

std::string LlmGateway::shorten(std::string_view answer) {
    if (text::char_count(answer) <= text::kMessageLimit) return std::string(answer);
    auto out = text::trim(call(shorten_prompt(answer)));
    if (out.empty()) out = std::string(answer);
    return text::truncate_at_sentence(out, text::kMessageLimit);
}

}  // namespace expertloop::llm
