#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/channel/conversation.hpp"
#include "expertloop/channel/messenger.hpp"
#include "expertloop/channel/sink.hpp"
#include "expertloop/core/error.hpp"
#include "expertloop/core/journal.hpp"
#include "expertloop/kb/pipeline.hpp"
#include "expertloop/knowledge/knowledge_store.hpp"
#include "expertloop/language/language_services.hpp"
#include "expertloop/llm/gateway.hpp"
#include "expertloop/onboarding/registry.hpp"
#include "expertloop/service/config.hpp"
#include "expertloop/workflow/workflow.hpp"

namespace expertloop::service {

inline constexpr std::string_view kTextNotUnderstood =
    "Sorry, we could not understand your message. Please try again.";
inline constexpr std::string_view kNoPendingVerification = "There is no answer waiting for your verification.";
inline constexpr std::string_view kAlreadyVerified = "This question has already been verified.";
inline constexpr std::string_view kBeingCorrected = "Another expert is already correcting this answer.";
inline constexpr std::string_view kRerouteOff = "Sending coordinator questions to the doctor is turned off.";
inline constexpr std::string_view kNotYourTask = "This question is not assigned to you.";

// Collaborators that tests and the simulator replace. Anything left empty is
// built from the configuration.
struct ServiceOverrides {
    std::shared_ptr<EventSink> log;
    std::vector<EventRecord> replay;  // with `log`: records it already holds
    std::shared_ptr<llm::CompletionProvider> llm;
    std::shared_ptr<language::Translator> translator;
    std::shared_ptr<language::SpeechToText> speech_to_text;
    std::shared_ptr<language::TextToSpeech> text_to_speech;
    std::shared_ptr<channel::OutboundSink> outbound;
    std::shared_ptr<kb::ReviewSink> review_sink;
    llm::Sleeper sleeper;
};

// Composition root: owns every module, routes inbound channel traffic, and
// drives the scheduled firings. Commands are serialised; each one first
// brings the scheduler up to its timestamp.
class Service {
public:
    explicit Service(ServiceConfig config, ServiceOverrides overrides = {});

    // Rebuilds the knowledge base, replays the event log, and records the
    // scheduler origin on first start. Throws CorruptLog.
    void start(Timestamp now);

    nlohmann::json handle_inbound(const channel::InboundMessage& message, Timestamp now);
    onboarding::RegistrationResult onboard(const onboarding::OnboardingForm& form, Timestamp now);
    workflow::TransitionResult decide(const UserId& expert, const TaskId& task, Decision decision, Timestamp now);
    workflow::CorrectionResult correct(const UserId& expert, const TaskId& task, const std::string& text,
                                       Timestamp now);
    std::size_t review(const std::vector<kb::ReviewRow>& rows, Timestamp now);

    // Runs every firing due up to `now` in chronological order; at one
    // instant the workflow goes first, then onboarding, then the KB loop.
    void advance_to(Timestamp now);
    std::optional<Timestamp> next_due() const;

    // Read side.
    nlohmann::json tasks_json(const std::string& state_filter, const std::optional<UserId>& expert) const;
    nlohmann::json conversation_json(const UserId& user) const;
    nlohmann::json snapshot() const;

    const ServiceConfig& config() const { return config_; }
    workflow::VerificationWorkflow& workflow() { return *workflow_; }
    onboarding::ProfileRegistry& registry() { return *registry_; }
    kb::KbUpdatePipeline& kb() { return *kb_; }
    knowledge::KnowledgeStore& store() { return *store_; }
    channel::ConversationStore& conversations() { return *conversations_; }
    language::LanguageServices& language() { return *language_; }
    EventSink& log() { return *log_; }
    Timestamp clock() const;

private:
    void advance_locked(Timestamp now);
    nlohmann::json route_seeker(const UserProfile& seeker, const channel::InboundMessage& m, Timestamp now);
    nlohmann::json route_expert(const UserProfile& expert, const channel::InboundMessage& m, Timestamp now);
    void notify(const UserProfile& user, std::string_view text, Timestamp now);

    ServiceConfig config_;
    std::shared_ptr<EventSink> log_;
    std::vector<EventRecord> replay_;
    std::unique_ptr<Journal> journal_;
    std::shared_ptr<channel::OutboundSink> outbound_;
    std::shared_ptr<kb::ReviewSink> review_sink_;
    std::unique_ptr<knowledge::KnowledgeStore> store_;
    std::unique_ptr<llm::LlmGateway> gateway_;
    std::unique_ptr<language::LanguageServices> language_;
    std::unique_ptr<channel::Messenger> messenger_;
    std::unique_ptr<channel::ConversationStore> conversations_;
    std::unique_ptr<onboarding::ProfileRegistry> registry_;
    std::unique_ptr<workflow::VerificationWorkflow> workflow_;
    std::unique_ptr<kb::KbUpdatePipeline> kb_;
    mutable std::recursive_mutex mutex_;
    Timestamp clock_{};
    bool started_ = false;
};

// Maps an error code to the HTTP status the API answers with.
int http_status_for(Errc code);

}  // namespace expertloop::service
