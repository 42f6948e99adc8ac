#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "expertloop/llm/prompts.hpp"

namespace expertloop::llm {

class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;

    // Raw completion text. Throws Error(ProviderFailure) on transport or
    // provider errors.
    virtual std::string complete(const PromptBundle& bundle) = 0;

    // Providers that cannot take concurrent calls return true; the gateway
    // then serialises access.
    virtual bool requires_serialization() const { return false; }
};

struct MockLlmOptions {
    std::vector<std::string> logistics_keywords{"insurance", "schedule", "cost",    "discharge",
                                                "appointment", "payment", "time to reach"};
    std::vector<std::string> greeting_keywords{"hello", "hi", "thank"};
    std::map<std::string, std::string> abbreviations{
        {"btr", "Better"}, {"wks", "weeks"}, {"wk", "week"},   {"appt", "appointment"}, {"pls", "please"},
        {"plz", "please"}, {"dr", "doctor"}, {"hrs", "hours"}, {"abt", "about"},        {"b4", "before"},
        {"u", "you"},      {"ur", "your"},   {"nd", "and"},    {"tmrw", "tomorrow"},
    };
};

// Deterministic stand-in for a language model. It reads only the rendered
// prompt, as a real model would: classification by keyword lists, extractive
// answers by content-word overlap, corrections by abbreviation expansion and
// re-attaching the question's subject.
class MockCompletionProvider final : public CompletionProvider {
public:
    explicit MockCompletionProvider(MockLlmOptions options = {}) : options_(std::move(options)) {}

    std::string complete(const PromptBundle& bundle) override;

    const MockLlmOptions& options() const { return options_; }

private:
    std::string generate_response(const PromptBundle& bundle) const;
    std::string generate_related(const PromptBundle& bundle) const;
    std::string generate_final(const PromptBundle& bundle) const;
    std::string generate_short(const PromptBundle& bundle) const;

    MockLlmOptions options_;
};

struct HttpProviderOptions {
    std::string base_url = "http://127.0.0.1:8000";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4";
    std::string api_key;
    int timeout_seconds = 60;
};

// Adapter for OpenAI-compatible chat completion endpoints.
class HttpCompletionProvider final : public CompletionProvider {
public:
    explicit HttpCompletionProvider(HttpProviderOptions options) : options_(std::move(options)) {}

    std::string complete(const PromptBundle& bundle) override;

private:
    HttpProviderOptions options_;
};

// Content words used by the mock for overlap scoring: lower-cased, stop words
// removed, light suffix stripping.
std::vector<std::string> content_words(std::string_view text);

}  // namespace expertloop::llm
