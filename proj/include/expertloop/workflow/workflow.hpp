#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/channel/messenger.hpp"
#include "expertloop/core/directory.hpp"
#include "expertloop/core/journal.hpp"
#include "expertloop/knowledge/knowledge_store.hpp"
#include "expertloop/language/language_services.hpp"
#include "expertloop/llm/gateway.hpp"

namespace expertloop::workflow {

inline constexpr std::string_view kVerifiedNotice = "This answer has been verified by an expert.";
inline constexpr std::string_view kAwaitCorrectionNotice =
    "An expert has marked this answer as incorrect. Please await a corrected response.";
inline constexpr std::string_view kTryAgainNotice =
    "Sorry, something went wrong while answering your question. Please try again.";
inline constexpr std::string_view kCorrectionRequest = "Please type the corrected answer to this question.";
inline constexpr std::string_view kNoCorrectionPending = "There is no answer awaiting your correction.";

struct VerificationTask {
    TaskId task_id;
    QueryId query_id;
    AnswerId answer_id;
    Track track = Track::DoctorTrack;
    UserId operating_expert_id;
    UserId escalation_expert_id;
    TaskState state = TaskState::AwaitingOperating;
    Timestamp created_at{};
    std::optional<Timestamp> escalated_at;
    std::optional<Timestamp> decided_at;
    std::optional<Timestamp> corrected_at;
    std::optional<UserId> deciding_expert_id;
    std::optional<std::string> correction_text;
    std::optional<std::string> final_answer;
    bool reminder_sent = false;
    std::optional<TaskId> predecessor_task_id;
    std::optional<TaskId> successor_task_id;
    // expert id -> ids of the verification messages that expert received
    std::map<UserId, std::vector<MessageId>> expert_messages;
    std::map<UserId, MessageId> button_messages;
    std::optional<MessageId> correction_request_message;

    bool is_terminal() const { return expertloop::is_terminal(state); }
};

void to_json(nlohmann::json& j, const VerificationTask& t);
void from_json(const nlohmann::json& j, VerificationTask& t);

struct AnswerRecord {
    BotAnswer answer;
    std::optional<MessageId> seeker_message_id;
    std::optional<MessageId> final_message_id;
};

enum class DueKind { Escalate, PendingReminder, Digest };

std::string_view to_string(DueKind kind);

struct DueEvent {
    DueKind kind = DueKind::Escalate;
    std::optional<TaskId> task_id;
    std::vector<UserId> recipient_ids;
    Timestamp due_at{};
    std::vector<TaskId> listed_tasks;  // digests only
};

struct WorkflowConfig {
    Seconds escalation_delay = std::chrono::hours(3);
    Seconds reminder_delay = std::chrono::hours(6);
    std::vector<TimeOfDay> digest_times{TimeOfDay::parse("08:00"), TimeOfDay::parse("12:00"), TimeOfDay::parse("16:00")};
    LocalZone zone;
    bool allow_reroute_to_doctor = true;
    std::size_t retrieval_k = 3;
};

struct ReplyPlan {
    std::optional<QueryId> query_id;
    std::optional<TaskId> task_id;
    QueryType query_type = QueryType::Other;
    bool failed = false;
};

struct TransitionResult {
    TaskId task_id;
    TaskState from = TaskState::AwaitingOperating;
    TaskState to = TaskState::AwaitingOperating;
    std::optional<TaskId> successor_task_id;
};

struct CorrectionResult {
    TaskId task_id;
    std::string final_answer;
    MessageId seeker_message_id;
};

// Per-query verification state machine. Every mutation is an event recorded
// through the journal; apply functions rebuild the same state on replay.
// All operations are serialised by one mutex, which also makes concurrent
// decisions on the same task resolve first-wins.
class VerificationWorkflow {
public:
    VerificationWorkflow(Journal& journal, channel::Messenger& messenger, const ProfileDirectory& directory,
                         knowledge::KnowledgeStore& store, llm::LlmGateway& gateway,
                         language::LanguageServices& language, WorkflowConfig config);

    // `inbound` carries the English text and modality of the seeker's message.
    ReplyPlan handle_seeker_message(const UserProfile& seeker, const language::NormalizedInbound& inbound,
                                    const MessageId& inbound_message_id, Timestamp now);

    TransitionResult submit_decision(const UserId& expert_id, const TaskId& task_id, Decision decision, Timestamp now);
    CorrectionResult submit_correction(const UserId& expert_id, const TaskId& task_id, const std::string& correction,
                                       Timestamp now);

    // Executes every due escalation, reminder and digest up to `now`, in
    // chronological order, each stamped with its exact due time.
    std::vector<DueEvent> tick(Timestamp now);
    std::optional<Timestamp> next_due() const;

    // Routing helpers for channel input from experts.
    std::optional<TaskId> task_for_button(const UserId& expert, const std::optional<MessageId>& context) const;
    std::optional<TaskId> task_awaiting_correction(const UserId& expert, const std::optional<MessageId>& context) const;

    std::optional<VerificationTask> task(const TaskId& id) const;
    std::vector<VerificationTask> tasks() const;
    std::optional<QueryRecord> query(const QueryId& id) const;
    std::optional<AnswerRecord> answer(const AnswerId& id) const;
    std::vector<llm::Turn> history(const UserId& seeker) const;

    void set_origin(Timestamp origin);
    const WorkflowConfig& config() const { return config_; }

    // Deterministic dump of all state, for replay comparisons.
    nlohmann::json snapshot() const;

private:
    struct Due {
        Timestamp at;
        DueKind kind;
        TaskId task_id;
    };

    void apply_query(const EventRecord& rec);
    void apply_answer(const EventRecord& rec);
    void apply_delivered(const EventRecord& rec);
    void apply_task_created(const EventRecord& rec);
    void apply_transition(const EventRecord& rec);
    void apply_verification_sent(const EventRecord& rec);
    void apply_reminder(const EventRecord& rec);
    void apply_digest(const EventRecord& rec);

    TaskId create_task(const QueryRecord& q, const AnswerRecord& a, Track track, const UserProfile& seeker,
                       std::optional<TaskId> predecessor, Timestamp now);
    void send_verification(const VerificationTask& t, const UserProfile& expert, Timestamp now);
    void record_transition(const VerificationTask& t, TaskState to, Timestamp at, nlohmann::json extra);
    void mark_experts_done(const VerificationTask& t, Timestamp now);
    UserProfile require_profile(const UserId& id) const;
    std::vector<Due> due_until(Timestamp now) const;
    std::string digest_line(const VerificationTask& t, Timestamp at) const;

    Journal* journal_;
    channel::Messenger* messenger_;
    const ProfileDirectory* directory_;
    knowledge::KnowledgeStore* store_;
    llm::LlmGateway* gateway_;
    language::LanguageServices* language_;
    WorkflowConfig config_;

    mutable std::recursive_mutex mutex_;
    std::map<QueryId, QueryRecord> queries_;
    std::map<AnswerId, AnswerRecord> answers_;
    std::map<QueryId, AnswerId> answer_for_query_;
    std::map<TaskId, VerificationTask> tasks_;
    std::vector<TaskId> task_order_;
    std::map<UserId, std::vector<llm::Turn>> history_;
    Timestamp digest_watermark_{};
    bool origin_set_ = false;
};

}  // namespace expertloop::workflow
