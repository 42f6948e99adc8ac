#include "expertloop/channel/conversation.hpp"

#include <mutex>

namespace expertloop::channel {

ConversationStore::ConversationStore(Journal& journal) {
    journal.subscribe(event_kind::kInboundReceived, [this](const EventRecord& r) { apply_inbound(r); });
    journal.subscribe(event_kind::kOutboundDispatched, [this](const EventRecord& r) { apply_outbound(r); });
}

void ConversationStore::apply_inbound(const EventRecord& rec) {
    const auto& p = rec.event.payload;
    ConversationEntry e;
    e.message_id = p.at("message_id").get<std::string>();
    e.at = rec.event.at;
    e.inbound = true;
    e.kind = p.at("kind").get<std::string>();
    e.text = p.value("text", "");
    if (p.contains("context_message_id")) e.target_message_id = p["context_message_id"].get<std::string>();
    auto user = p.at("user_id").get<std::string>();
    std::unique_lock lock(mutex_);
    auto& list = by_user_[user];
    index_[e.message_id] = {user, list.size()};
    list.push_back(std::move(e));
}

void ConversationStore::apply_outbound(const EventRecord& rec) {
    const auto& p = rec.event.payload;
    const auto& w = p.at("payload");
    auto user = p.at("user_id").get<std::string>();
    auto kind = w.at("kind").get<std::string>();
    std::unique_lock lock(mutex_);
    if (kind == "reaction") {
        auto it = index_.find(w.at("target_message_id").get<std::string>());
        if (it != index_.end()) by_user_[it->second.first][it->second.second].reaction = w.at("glyph").get<std::string>();
        return;
    }
    ConversationEntry e;
    e.message_id = w.at("message_id").get<std::string>();
    e.at = rec.event.at;
    e.kind = kind;
    if (kind == "text" || kind == "tagged_reply" || kind == "buttons") e.text = w.at("text").get<std::string>();
    if (kind == "audio") e.text = w.at("audio_ref").get<std::string>();
    if (kind == "suggestions") {
        e.text = w.at("header").get<std::string>();
        e.options = w.at("options").get<std::vector<std::string>>();
    }
    if (kind == "buttons") e.options = w.at("buttons").get<std::vector<std::string>>();
    if (w.contains("target_message_id")) e.target_message_id = w["target_message_id"].get<std::string>();
    auto& list = by_user_[user];
    index_[e.message_id] = {user, list.size()};
    list.push_back(std::move(e));
}

std::vector<ConversationEntry> ConversationStore::conversation(const UserId& user) const {
    std::shared_lock lock(mutex_);
    auto it = by_user_.find(user);
    return it == by_user_.end() ? std::vector<ConversationEntry>{} : it->second;
}

std::optional<ConversationEntry> ConversationStore::message(const MessageId& id) const {
    std::shared_lock lock(mutex_);
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return by_user_.at(it->second.first)[it->second.second];
}

nlohmann::json ConversationStore::to_json(const UserId& user) const {
    auto out = nlohmann::json::array();
    for (const auto& e : conversation(user)) {
        nlohmann::json j{{"message_id", e.message_id},
                         {"at", format_rfc3339(e.at)},
                         {"direction", e.inbound ? "in" : "out"},
                         {"kind", e.kind},
                         {"text", e.text}};
        if (!e.options.empty()) j["options"] = e.options;
        if (e.target_message_id) j["target_message_id"] = *e.target_message_id;
        if (e.reaction) j["reaction"] = *e.reaction;
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace expertloop::channel
