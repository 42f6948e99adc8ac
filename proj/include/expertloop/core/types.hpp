#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/core/time.hpp"

namespace expertloop {

using UserId = std::string;
using QueryId = std::string;
using AnswerId = std::string;
using TaskId = std::string;
using MessageId = std::string;
using ChannelAddress = std::string;

enum class Role {
    Patient,
    Attendant,
    OperatingDoctor,
    EscalationDoctor,
    OperatingCoordinator,
    EscalationCoordinator,
    KnowledgeBaseExpert,
};

enum class LanguageCode { EN, HI, KN, TA, TE };

enum class Modality { Text, Audio, Tap };

enum class QueryType { Medical, Logistical, SmallTalk, Other };

enum class AnswerStatus { Unverified, Verified, MarkedIncorrect, Corrected };

enum class IconState { QuestionMark, GreenTick, RedCross };

enum class Track { DoctorTrack, CoordinatorTrack };

enum class TaskState {
    AwaitingOperating,
    Escalated,
    ApprovedYes,
    AwaitingCorrection,
    CorrectedDone,
    Rerouted,
};

enum class Decision { Yes, No, Reroute };

bool is_seeker(Role role);
bool is_expert(Role role);

IconState icon_for(AnswerStatus status);
bool is_legal_transition(AnswerStatus from, AnswerStatus to);
bool is_terminal(AnswerStatus status);

bool is_legal_transition(TaskState from, TaskState to);
bool is_terminal(TaskState state);

Track opposite(Track track);

// Reaction glyph rendered on the channel for an icon.
std::string_view glyph(IconState icon);
std::optional<IconState> icon_from_glyph(std::string_view glyph);

// Canonical string forms, used on the wire and in the event log.
std::string_view to_string(Role v);
std::string_view to_string(LanguageCode v);
std::string_view to_string(Modality v);
std::string_view to_string(QueryType v);
std::string_view to_string(AnswerStatus v);
std::string_view to_string(IconState v);
std::string_view to_string(Track v);
std::string_view to_string(TaskState v);
std::string_view to_string(Decision v);

Role parse_role(std::string_view s);
LanguageCode parse_language(std::string_view s);
Modality parse_modality(std::string_view s);
QueryType parse_query_type(std::string_view s);
AnswerStatus parse_answer_status(std::string_view s);
Track parse_track(std::string_view s);
TaskState parse_task_state(std::string_view s);
Decision parse_decision(std::string_view s);

inline constexpr LanguageCode kAllLanguages[] = {LanguageCode::EN, LanguageCode::HI, LanguageCode::KN,
                                                 LanguageCode::TA, LanguageCode::TE};

struct UserProfile {
    UserId user_id;
    Role role = Role::Patient;
    LanguageCode language = LanguageCode::EN;
    ChannelAddress channel_address;
    std::string display_demographics;
    std::optional<Date> surgery_date;
    std::optional<UserId> operating_doctor_id;
    std::optional<UserId> operating_coordinator_id;
    std::optional<Timestamp> active_until;
    std::optional<Timestamp> enrolled_at;
    bool deactivated = false;

    bool is_active(Timestamp now) const;

    // Throws Error(InvalidArgument) when the role-specific invariants fail.
    void validate() const;
};

struct QueryRecord {
    QueryId query_id;
    UserId seeker_id;
    std::string original_text;
    Modality original_modality = Modality::Text;
    std::string english_text;
    QueryType query_type = QueryType::Other;
    Timestamp asked_at{};
    std::string conversation_id;
    std::optional<std::string> audio_ref;
};

struct BotAnswer {
    AnswerId answer_id;
    QueryId query_id;
    std::string english_answer;
    std::vector<std::string> citations;
    bool is_unknown = false;
    AnswerStatus status = AnswerStatus::Unverified;
    std::vector<std::string> related_questions;
};

void to_json(nlohmann::json& j, const UserProfile& p);
void from_json(const nlohmann::json& j, UserProfile& p);
void to_json(nlohmann::json& j, const QueryRecord& q);
void from_json(const nlohmann::json& j, QueryRecord& q);
void to_json(nlohmann::json& j, const BotAnswer& a);
void from_json(const nlohmann::json& j, BotAnswer& a);

}  // namespace expertloop
