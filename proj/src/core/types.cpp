#include "expertloop/core/types.hpp"

#include <array>
#include <utility>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"

namespace expertloop {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& table,
             std::string_view what) {
    for (const auto& [value, name] : table) {
        if (text::iequals(name, s)) return value;
    }
    throw Error(Errc::InvalidArgument, "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view name_of(E v, const std::array<std::pair<E, std::string_view>, N>& table) {
    for (const auto& [value, name] : table) {
        if (value == v) return name;
    }
    return "?";
}

constexpr std::array<std::pair<Role, std::string_view>, 7> kRoles{{
    {Role::Patient, "Patient"},
    {Role::Attendant, "Attendant"},
    {Role::OperatingDoctor, "OperatingDoctor"},
    {Role::EscalationDoctor, "EscalationDoctor"},
    {Role::OperatingCoordinator, "OperatingCoordinator"},
    {Role::EscalationCoordinator, "EscalationCoordinator"},
    {Role::KnowledgeBaseExpert, "KnowledgeBaseExpert"},
}};

constexpr std::array<std::pair<LanguageCode, std::string_view>, 5> kLanguages{{
    {LanguageCode::EN, "EN"},
    {LanguageCode::HI, "HI"},
    {LanguageCode::KN, "KN"},
    {LanguageCode::TA, "TA"},
    {LanguageCode::TE, "TE"},
}};

constexpr std::array<std::pair<Modality, std::string_view>, 3> kModalities{{
    {Modality::Text, "Text"},
    {Modality::Audio, "Audio"},
    {Modality::Tap, "Tap"},
}};

constexpr std::array<std::pair<QueryType, std::string_view>, 4> kQueryTypes{{
    {QueryType::Medical, "Medical"},
    {QueryType::Logistical, "Logistical"},
    {QueryType::SmallTalk, "SmallTalk"},
    {QueryType::Other, "Other"},
}};

constexpr std::array<std::pair<AnswerStatus, std::string_view>, 4> kAnswerStatuses{{
    {AnswerStatus::Unverified, "Unverified"},
    {AnswerStatus::Verified, "Verified"},
    {AnswerStatus::MarkedIncorrect, "MarkedIncorrect"},
    {AnswerStatus::Corrected, "Corrected"},
}};

constexpr std::array<std::pair<IconState, std::string_view>, 3> kIcons{{
    {IconState::QuestionMark, "QuestionMark"},
    {IconState::GreenTick, "GreenTick"},
    {IconState::RedCross, "RedCross"},
}};

constexpr std::array<std::pair<Track, std::string_view>, 2> kTracks{{
    {Track::DoctorTrack, "DoctorTrack"},
    {Track::CoordinatorTrack, "CoordinatorTrack"},
}};

constexpr std::array<std::pair<TaskState, std::string_view>, 6> kTaskStates{{
    {TaskState::AwaitingOperating, "AwaitingOperating"},
    {TaskState::Escalated, "Escalated"},
    {TaskState::ApprovedYes, "ApprovedYes"},
    {TaskState::AwaitingCorrection, "AwaitingCorrection"},
    {TaskState::CorrectedDone, "CorrectedDone"},
    {TaskState::Rerouted, "Rerouted"},
}};

constexpr std::array<std::pair<Decision, std::string_view>, 3> kDecisions{{
    {Decision::Yes, "Yes"},
    {Decision::No, "No"},
    {Decision::Reroute, "Reroute"},
}};

}  // namespace

bool is_seeker(Role role) { return role == Role::Patient || role == Role::Attendant; }
bool is_expert(Role role) { return !is_seeker(role); }

IconState icon_for(AnswerStatus status) {
    switch (status) {
        case AnswerStatus::Unverified: return IconState::QuestionMark;
        case AnswerStatus::Verified: return IconState::GreenTick;
        case AnswerStatus::MarkedIncorrect: return IconState::RedCross;
        case AnswerStatus::Corrected: return IconState::GreenTick;
    }
    return IconState::QuestionMark;
}

bool is_legal_transition(AnswerStatus from, AnswerStatus to) {
    return (from == AnswerStatus::Unverified && to == AnswerStatus::Verified) ||
           (from == AnswerStatus::Unverified && to == AnswerStatus::MarkedIncorrect) ||
           (from == AnswerStatus::MarkedIncorrect && to == AnswerStatus::Corrected);
}

bool is_terminal(AnswerStatus status) {
    return status == AnswerStatus::Verified || status == AnswerStatus::Corrected;
}

bool is_legal_transition(TaskState from, TaskState to) {
    switch (from) {
        case TaskState::AwaitingOperating:
            return to == TaskState::Escalated || to == TaskState::ApprovedYes ||
                   to == TaskState::AwaitingCorrection || to == TaskState::Rerouted;
        case TaskState::Escalated:
            return to == TaskState::ApprovedYes || to == TaskState::AwaitingCorrection ||
                   to == TaskState::Rerouted;
        case TaskState::AwaitingCorrection: return to == TaskState::CorrectedDone;
        case TaskState::ApprovedYes:
        case TaskState::CorrectedDone:
        case TaskState::Rerouted: return false;
    }
    return false;
}

bool is_terminal(TaskState state) {
    return state == TaskState::ApprovedYes || state == TaskState::CorrectedDone || state == TaskState::Rerouted;
}

Track opposite(Track track) {
    return track == Track::DoctorTrack ? Track::CoordinatorTrack : Track::DoctorTrack;
}

std::string_view glyph(IconState icon) {
    switch (icon) {
        case IconState::QuestionMark: return "❓";
        case IconState::GreenTick: return "✅";
        case IconState::RedCross: return "❌";
    }
    return "";
}

std::optional<IconState> icon_from_glyph(std::string_view g) {
    for (auto icon : {IconState::QuestionMark, IconState::GreenTick, IconState::RedCross}) {
        if (glyph(icon) == g) return icon;
    }
    return std::nullopt;
}

std::string_view to_string(Role v) { return name_of(v, kRoles); }
std::string_view to_string(LanguageCode v) { return name_of(v, kLanguages); }
std::string_view to_string(Modality v) { return name_of(v, kModalities); }
std::string_view to_string(QueryType v) { return name_of(v, kQueryTypes); }
std::string_view to_string(AnswerStatus v) { return name_of(v, kAnswerStatuses); }
std::string_view to_string(IconState v) { return name_of(v, kIcons); }
std::string_view to_string(Track v) { return name_of(v, kTracks); }
std::string_view to_string(TaskState v) { return name_of(v, kTaskStates); }
std::string_view to_string(Decision v) { return name_of(v, kDecisions); }

Role parse_role(std::string_view s) { return parse_enum(s, kRoles, "role"); }
LanguageCode parse_language(std::string_view s) { return parse_enum(s, kLanguages, "language"); }
Modality parse_modality(std::string_view s) { return parse_enum(s, kModalities, "modality"); }
QueryType parse_query_type(std::string_view s) { return parse_enum(s, kQueryTypes, "query type"); }
AnswerStatus parse_answer_status(std::string_view s) { return parse_enum(s, kAnswerStatuses, "answer status"); }
Track parse_track(std::string_view s) { return parse_enum(s, kTracks, "track"); }
TaskState parse_task_state(std::string_view s) { return parse_enum(s, kTaskStates, "task state"); }
Decision parse_decision(std::string_view s) { return parse_enum(s, kDecisions, "decision"); }

bool UserProfile::is_active(Timestamp now) const {
    if (!is_seeker(role)) return true;
    return !deactivated && active_until && now < *active_until;
}

void UserProfile::validate() const {
    if (user_id.empty()) throw Error(Errc::InvalidArgument, "profile without user_id");
    if (is_seeker(role)) {
        if (!surgery_date || !operating_doctor_id || !operating_coordinator_id || !active_until) {
            throw Error(Errc::InvalidArgument,
                        "seeker " + user_id + " needs surgery date, operating experts and active_until");
        }
    } else if (language != LanguageCode::EN) {
        throw Error(Errc::InvalidArgument, "expert " + user_id + " must use EN");
    }
}

namespace {

template <typename T>
void put_opt(nlohmann::json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

}  // namespace

void to_json(nlohmann::json& j, const UserProfile& p) {
    j = nlohmann::json{{"user_id", p.user_id},
                       {"role", to_string(p.role)},
                       {"language", to_string(p.language)},
                       {"channel_address", p.channel_address},
                       {"display_demographics", p.display_demographics},
                       {"deactivated", p.deactivated}};
    if (p.surgery_date) j["surgery_date"] = format_date(*p.surgery_date);
    put_opt(j, "operating_doctor_id", p.operating_doctor_id);
    put_opt(j, "operating_coordinator_id", p.operating_coordinator_id);
    if (p.active_until) j["active_until"] = format_rfc3339(*p.active_until);
    if (p.enrolled_at) j["enrolled_at"] = format_rfc3339(*p.enrolled_at);
}

void from_json(const nlohmann::json& j, UserProfile& p) {
    p.user_id = j.at("user_id").get<std::string>();
    p.role = parse_role(j.at("role").get<std::string>());
    p.language = parse_language(j.value("language", "EN"));
    p.channel_address = j.value("channel_address", "");
    p.display_demographics = j.value("display_demographics", "");
    p.deactivated = j.value("deactivated", false);
    if (j.contains("surgery_date")) p.surgery_date = parse_date(j["surgery_date"].get<std::string>());
    if (j.contains("operating_doctor_id")) p.operating_doctor_id = j["operating_doctor_id"].get<std::string>();
    if (j.contains("operating_coordinator_id")) {
        p.operating_coordinator_id = j["operating_coordinator_id"].get<std::string>();
    }
    if (j.contains("active_until")) p.active_until = parse_rfc3339(j["active_until"].get<std::string>());
    if (j.contains("enrolled_at")) p.enrolled_at = parse_rfc3339(j["enrolled_at"].get<std::string>());
}

void to_json(nlohmann::json& j, const QueryRecord& q) {
    j = nlohmann::json{{"query_id", q.query_id},
                       {"seeker_id", q.seeker_id},
                       {"original_text", q.original_text},
                       {"original_modality", to_string(q.original_modality)},
                       {"english_text", q.english_text},
                       {"query_type", to_string(q.query_type)},
                       {"asked_at", format_rfc3339(q.asked_at)},
                       {"conversation_id", q.conversation_id}};
    put_opt(j, "audio_ref", q.audio_ref);
}

void from_json(const nlohmann::json& j, QueryRecord& q) {
    q.query_id = j.at("query_id").get<std::string>();
    q.seeker_id = j.at("seeker_id").get<std::string>();
    q.original_text = j.at("original_text").get<std::string>();
    q.original_modality = parse_modality(j.at("original_modality").get<std::string>());
    q.english_text = j.at("english_text").get<std::string>();
    q.query_type = parse_query_type(j.at("query_type").get<std::string>());
    q.asked_at = parse_rfc3339(j.at("asked_at").get<std::string>());
    q.conversation_id = j.at("conversation_id").get<std::string>();
    if (j.contains("audio_ref")) q.audio_ref = j["audio_ref"].get<std::string>();
}

void to_json(nlohmann::json& j, const BotAnswer& a) {
    j = nlohmann::json{{"answer_id", a.answer_id},
                       {"query_id", a.query_id},
                       {"english_answer", a.english_answer},
                       {"citations", a.citations},
                       {"is_unknown", a.is_unknown},
                       {"status", to_string(a.status)},
                       {"related_questions", a.related_questions}};
}

void from_json(const nlohmann::json& j, BotAnswer& a) {
    a.answer_id = j.at("answer_id").get<std::string>();
    a.query_id = j.at("query_id").get<std::string>();
    a.english_answer = j.at("english_answer").get<std::string>();
    a.citations = j.at("citations").get<std::vector<std::string>>();
    a.is_unknown = j.at("is_unknown").get<bool>();
    a.status = parse_answer_status(j.at("status").get<std::string>());
    a.related_questions = j.at("related_questions").get<std::vector<std::string>>();
}

}  // namespace expertloop
