#include "expertloop/channel/messenger.hpp"

#include "expertloop/core/error.hpp"

namespace expertloop::channel {

Messenger::Messenger(Journal& journal, OutboundSink& sink, language::LanguageServices& language)
    : journal_(&journal), sink_(&sink), language_(&language) {
    journal.subscribe(event_kind::kSuggestionsOffered, [this](const EventRecord& r) { apply_suggestions(r); });
}

MessageId Messenger::send(const UserProfile& to, OutboundAction action, Timestamp now) {
    action.recipient = to.channel_address;
    action.message_id = journal_->next_id("msg", now);
    auto payload = render_outbound(action);  // validates
    auto offset = journal_->record(
        {event_kind::kOutboundDispatched, now, {{"user_id", to.user_id}, {"payload", payload}}});
    sink_->deliver({offset, now, std::move(payload)});
    return action.message_id;
}

SentText Messenger::send_text(const UserProfile& to, const std::string& english, bool want_audio, Timestamp now) {
    auto localized = language_->localize(english, to.language, want_audio, now);
    SentText out;
    out.text_id = send(to, channel::send_text(to.channel_address, localized.text), now);
    if (localized.audio_ref) out.audio_id = send(to, channel::send_audio(to.channel_address, *localized.audio_ref), now);
    return out;
}

SentText Messenger::send_tagged(const UserProfile& to, const MessageId& target, const std::string& english,
                                bool want_audio, Timestamp now) {
    auto localized = language_->localize(english, to.language, want_audio, now);
    SentText out;
    out.text_id = send(to, tagged_reply(to.channel_address, target, localized.text), now);
    if (localized.audio_ref) out.audio_id = send(to, channel::send_audio(to.channel_address, *localized.audio_ref), now);
    return out;
}

MessageId Messenger::react(const UserProfile& to, const MessageId& target, IconState icon, Timestamp now) {
    return send(to, set_reaction(to.channel_address, target, icon), now);
}

MessageId Messenger::offer_suggestions(const UserProfile& to, const std::vector<std::string>& english, Timestamp now) {
    if (english.size() != 3) throw Error(Errc::InvalidArgument, "exactly three suggestions are offered");
    std::vector<std::string> labels;
    for (const auto& e : english) labels.push_back(language_->localize_label(e, to.language));
    auto header = language_->localize_label(std::string(kSuggestionsHeader), to.language);
    auto id = send(to, suggestion_list(to.channel_address, std::move(labels), std::move(header)), now);
    journal_->record({event_kind::kSuggestionsOffered, now,
                      {{"user_id", to.user_id}, {"message_id", id}, {"suggestions", english}}});
    return id;
}

std::optional<std::string> Messenger::suggestion(const UserId& user, int index) const {
    auto it = last_suggestions_.find(user);
    if (it == last_suggestions_.end() || index < 1 || static_cast<std::size_t>(index) > it->second.size()) {
        return std::nullopt;
    }
    return it->second[static_cast<std::size_t>(index - 1)];
}

void Messenger::apply_suggestions(const EventRecord& rec) {
    const auto& p = rec.event.payload;
    last_suggestions_[p.at("user_id").get<std::string>()] = p.at("suggestions").get<std::vector<std::string>>();
}

}  // namespace expertloop::channel
