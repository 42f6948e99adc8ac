#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace expertloop::llm {

enum class PromptTask { ResponseGeneration, RelatedQuestions, FinalResponse, Shorten };

std::string_view to_string(PromptTask task);

struct PromptBundle {
    std::string system_prompt;
    std::string query_prompt;
    PromptTask task = PromptTask::ResponseGeneration;
};

struct Turn {
    std::string question;
    std::string answer;
};

// The four prompt templates. Placeholders are the angle-bracketed tokens; the
// rest of each template is fixed text.
namespace templates {
extern const std::string_view kResponseSystem;
extern const std::string_view kResponseQuery;
extern const std::string_view kRelatedSystem;
extern const std::string_view kRelatedQuery;
extern const std::string_view kFinalSystem;
extern const std::string_view kFinalQuery;
extern const std::string_view kShortenSystem;
extern const std::string_view kShortenQuery;

inline constexpr std::string_view kRawChunks = "<relevant chunks string>";
inline constexpr std::string_view kNewChunks = "<relevant updated chunks string>";
inline constexpr std::string_view kConversation = "<conversation string>";
inline constexpr std::string_view kUserQuery = "<user query>";
inline constexpr std::string_view kQuery = "<query>";
inline constexpr std::string_view kResponse = "<response>";
inline constexpr std::string_view kCorrection = "<correction>";
}  // namespace templates

inline constexpr std::string_view kUnknownAnswer =
    "I do not know the answer to your question. If this needs to be answered by a doctor, please schedule a "
    "consultation.";

// Replaces each placeholder occurrence in one left-to-right pass; substituted
// values are never rescanned.
std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string_view, std::string_view>>& values);

std::string format_chunks(const std::vector<std::string>& chunks);
std::string format_history(const std::vector<Turn>& turns);

PromptBundle response_generation_prompt(const std::vector<std::string>& raw_chunks,
                                        const std::vector<std::string>& faq_chunks,
                                        const std::vector<Turn>& history, std::string_view query);
PromptBundle related_questions_prompt(std::string_view query, std::string_view response);
PromptBundle final_response_prompt(std::string_view query, std::string_view response, std::string_view correction);
PromptBundle shorten_prompt(std::string_view response);

}  // namespace expertloop::llm
