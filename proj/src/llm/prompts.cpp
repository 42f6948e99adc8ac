#include "expertloop/llm/prompts.hpp"

namespace expertloop::llm {

namespace templates {

const std::string_view kResponseSystem =
    "You are a Cataract chatbot whose primary goal is to help patients undergoing or undergone a cataract "
    "surgery. If the query can be truthfully and factually answered using the knowledge base only, answer it "
    "concisely in a polite and professional way. If not, then just say \"I do not know the answer to your "
    "question. If this needs to be answered by a doctor, please schedule a consultation.\"\n"
    "\n"
    "In case of a conflict between raw knowledge base and new knowledge base, prefer the new knowledge base. One "
    "exception to the above is if the query is a greeting or an acknowledgement or gratitude. If the query is a "
    "greeting, then respond with a greeting. If the query is an acknowledgement or gratitude to the bot's "
    "response, then respond with an acknowledgement of the same. Some examples of acknowledgement or gratitude to "
    "the bot's response are \"Thank You\", \"Got it\" and \"I understand\". In addition to the above, indicate "
    "like a 3-class classifier if the query is \"medical\", \"logistical\" or \"small-talk\". Here, "
    "\"small-talk\" is defined as a query which is a greeting or an acknowledgement or gratitude. Answer it in the "
    "following json format:\n"
    "{\"response\": \"<answer to the query>\", \"query_type\": \"<medical | logistical | small-talk>\"}";

const std::string_view kResponseQuery =
    "The following knowledge base have been provided to you as reference:\n"
    "    Raw documents are as follows:\n"
    "        <relevant chunks string>\n"
    "    New documents are as follows:\n"
    "        <relevant updated chunks string>\n"
    "    The most recent conversations are here:\n"
    "        <conversation string>\n"
    "    You are asked the following query:\n"
    "        <user query>\n"
    "\n"
    "Ensure that the query type belongs to only the above mentioned three categories. When not sure, choose one "
    "of \"medical\" or \"logistical\".";

const std::string_view kRelatedSystem =
    "What are three possible follow-up questions the patient might ask? Respond with the questions only in a "
    "python list of strings. Each question should not exceed 72 characters.";

const std::string_view kRelatedQuery =
    "A patient asked the following query:\n"
    "<query>\n"
    "A chatbot answered the following:\n"
    "<response>";

const std::string_view kFinalSystem =
    "You are a Cataract chatbot whose primary goal is to help patients undergoing or undergone a cataract "
    "surgery. A cataract patient asks a query and a cataract chatbot answers it. But, the doctor gives a "
    "correction to the chatbot's response. Update the cataract chatbot's response by taking the doctor's "
    "correction into account. Respond only with the final updated response.";

const std::string_view kFinalQuery =
    "A cataract patient asked the following query:\n"
    "<query>\n"
    "A cataract chatbot answered the following:\n"
    "<response>\n"
    "A doctor corrected the response as follows:\n"
    "<correction>";

const std::string_view kShortenSystem =
    "You are a Cataract chatbot, and you have to summarize the answer provided by a bot. Please summarise the "
    "answer in 700 characters or less. Only return the summarized answer and nothing else.";

const std::string_view kShortenQuery =
    "You are given the following response:\n"
    "<response>";

}  // namespace templates

std::string_view to_string(PromptTask task) {
    switch (task) {
        case PromptTask::ResponseGeneration: return "ResponseGeneration";
        case PromptTask::RelatedQuestions: return "RelatedQuestions";
        case PromptTask::FinalResponse: return "FinalResponse";
        case PromptTask::Shorten: return "Shorten";
    }
    return "?";
}

std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string_view, std::string_view>>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        bool replaced = false;
        if (tmpl[i] == '<') {
            for (const auto& [placeholder, value] : values) {
                if (tmpl.substr(i, placeholder.size()) == placeholder) {
                    out += value;
                    i += placeholder.size();
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) out += tmpl[i++];
    }
    return out;
}

std::string format_chunks(const std::vector<std::string>& chunks) {
    std::string out;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (i) out += "\n\n";
        out += chunks[i];
    }
    return out;
}

std::string format_history(const std::vector<Turn>& turns) {
    std::string out;
    for (std::size_t i = 0; i < turns.size(); ++i) {
        if (i) out += '\n';
        out += "Patient: " + turns[i].question + "\nChatbot: " + turns[i].answer;
    }
    return out;
}

PromptBundle response_generation_prompt(const std::vector<std::string>& raw_chunks,
                                        const std::vector<std::string>& faq_chunks,
                                        const std::vector<Turn>& history, std::string_view query) {
    auto raw = format_chunks(raw_chunks);
    auto faq = format_chunks(faq_chunks);
    auto conv = format_history(history);
    return {std::string(templates::kResponseSystem),
            render_template(templates::kResponseQuery, {{templates::kRawChunks, raw},
                                                        {templates::kNewChunks, faq},
                                                        {templates::kConversation, conv},
                                                        {templates::kUserQuery, query}}),
            PromptTask::ResponseGeneration};
}

PromptBundle related_questions_prompt(std::string_view query, std::string_view response) {
    return {std::string(templates::kRelatedSystem),
            render_template(templates::kRelatedQuery, {{templates::kQuery, query}, {templates::kResponse, response}}),
            PromptTask::RelatedQuestions};
}

PromptBundle final_response_prompt(std::string_view query, std::string_view response, std::string_view correction) {
    return {std::string(templates::kFinalSystem),
            render_template(templates::kFinalQuery, {{templates::kQuery, query},
                                                     {templates::kResponse, response},
                                                     {templates::kCorrection, correction}}),
            PromptTask::FinalResponse};
}

PromptBundle shorten_prompt(std::string_view response) {
    return {std::string(templates::kShortenSystem),
            render_template(templates::kShortenQuery, {{templates::kResponse, response}}), PromptTask::Shorten};
}

}  // namespace expertloop::llm
