#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "expertloop/core/time.hpp"
#include "expertloop/core/types.hpp"
#include "expertloop/llm/completion_provider.hpp"
#include "expertloop/llm/prompts.hpp"

namespace expertloop::llm {

struct AnswerGeneration {
    std::string english_answer;
    QueryType query_type = QueryType::Other;
    bool is_unknown = false;
};

struct GatewayConfig {
    std::size_t history_turns = 4;
    int max_retries = 2;
    Seconds initial_backoff{1};
    std::vector<std::string> fallback_questions{
        "How long is the recovery time after cataract surgery?",
        "Will I feel any pain during the surgery?",
        "What are the risks associated with cataract surgery?",
    };
};

using Sleeper = std::function<void(Seconds)>;

// Parses a model's list-of-strings reply (python or JSON quoting). Returns an
// empty list when nothing parseable is found.
std::vector<std::string> parse_string_list(std::string_view raw);

// Parses the response-generation JSON object. Throws Error(MalformedOutput).
AnswerGeneration parse_answer_generation(std::string_view raw);

class LlmGateway {
public:
    LlmGateway(std::shared_ptr<CompletionProvider> provider, GatewayConfig config = {}, Sleeper sleeper = {});

    AnswerGeneration answer_query(std::string_view query, const std::vector<std::string>& raw_chunks,
                                  const std::vector<std::string>& faq_chunks, const std::vector<Turn>& history);

    // Always exactly three questions of at most 72 characters.
    std::vector<std::string> related_questions(std::string_view query, std::string_view answer);

    std::string merge_correction(std::string_view query, std::string_view bot_answer, std::string_view correction);

    // Output is at most 700 characters whatever the provider returns.
    std::string shorten(std::string_view answer);

    const GatewayConfig& config() const { return config_; }

private:
    std::string call(const PromptBundle& bundle);

    std::shared_ptr<CompletionProvider> provider_;
    GatewayConfig config_;
    Sleeper sleeper_;
    std::mutex provider_mutex_;
};

}  // namespace expertloop::llm
