#pragma once

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/core/journal.hpp"
#include "expertloop/core/types.hpp"

namespace expertloop::channel {

struct ConversationEntry {
    MessageId message_id;
    Timestamp at{};
    bool inbound = false;
    std::string kind;  // wire kind
    std::string text;
    std::vector<std::string> options;
    std::optional<MessageId> target_message_id;
    std::optional<std::string> reaction;  // current glyph on this message
};

// Read model of every user's message history, folded from InboundReceived
// and OutboundDispatched events. Reactions are applied to their target
// rather than listed; a later reaction replaces an earlier one.
class ConversationStore {
public:
    explicit ConversationStore(Journal& journal);

    std::vector<ConversationEntry> conversation(const UserId& user) const;
    std::optional<ConversationEntry> message(const MessageId& id) const;
    nlohmann::json to_json(const UserId& user) const;

private:
    void apply_inbound(const EventRecord& rec);
    void apply_outbound(const EventRecord& rec);

    mutable std::shared_mutex mutex_;
    std::map<UserId, std::vector<ConversationEntry>> by_user_;
    std::map<MessageId, std::pair<UserId, std::size_t>> index_;
};

}  // namespace expertloop::channel
