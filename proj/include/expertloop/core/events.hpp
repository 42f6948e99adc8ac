#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "expertloop/core/time.hpp"

namespace expertloop {

// A state change, as recorded in the append-only log. Every module that owns
// state mutates it only by applying events of its own kinds, so folding the
// log reproduces live state.
struct Event {
    std::string kind;
    Timestamp at{};
    nlohmann::json payload = nlohmann::json::object();
};

struct EventRecord {
    std::uint64_t offset = 0;
    Event event;
};

class EventSink {
public:
    virtual ~EventSink() = default;

    // Durably appends and returns the assigned offset.
    virtual std::uint64_t append(const Event& event) = 0;
    virtual std::uint64_t next_offset() const = 0;
};

namespace event_kind {
inline constexpr const char* kInboundReceived = "InboundReceived";
inline constexpr const char* kQueryReceived = "QueryReceived";
inline constexpr const char* kAnswerGenerated = "AnswerGenerated";
inline constexpr const char* kAnswerDelivered = "AnswerDelivered";
inline constexpr const char* kTaskCreated = "TaskCreated";
inline constexpr const char* kTaskTransition = "TaskTransition";
inline constexpr const char* kVerificationSent = "VerificationSent";
inline constexpr const char* kReminderSent = "ReminderSent";
inline constexpr const char* kDigestFired = "DigestFired";
inline constexpr const char* kOutboundDispatched = "OutboundDispatched";
inline constexpr const char* kSuggestionsOffered = "SuggestionsOffered";
inline constexpr const char* kProfileChanged = "ProfileChanged";
inline constexpr const char* kSeekerReminderFired = "SeekerReminderFired";
inline constexpr const char* kLanguageMenuOpened = "LanguageMenuOpened";
inline constexpr const char* kDigestEmitted = "DigestEmitted";
inline constexpr const char* kReviewIngested = "ReviewIngested";
inline constexpr const char* kFAQApplied = "FAQApplied";
inline constexpr const char* kSchedulerStarted = "SchedulerStarted";
}  // namespace event_kind

}  // namespace expertloop
