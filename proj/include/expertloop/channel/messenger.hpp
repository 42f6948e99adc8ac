#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "expertloop/channel/sink.hpp"
#include "expertloop/channel/wire.hpp"
#include "expertloop/core/journal.hpp"
#include "expertloop/core/types.hpp"
#include "expertloop/language/language_services.hpp"

namespace expertloop::channel {

struct SentText {
    MessageId text_id;
    std::optional<MessageId> audio_id;
};

// Every outbound message goes through here: ids are assigned, an
// OutboundDispatched event is recorded, then the payload is delivered.
// Seeker-bound text is localized on the way.
class Messenger {
public:
    Messenger(Journal& journal, OutboundSink& sink, language::LanguageServices& language);

    MessageId send(const UserProfile& to, OutboundAction action, Timestamp now);

    SentText send_text(const UserProfile& to, const std::string& english, bool want_audio, Timestamp now);
    SentText send_tagged(const UserProfile& to, const MessageId& target, const std::string& english, bool want_audio,
                         Timestamp now);
    MessageId react(const UserProfile& to, const MessageId& target, IconState icon, Timestamp now);
    MessageId offer_suggestions(const UserProfile& to, const std::vector<std::string>& english, Timestamp now);

    // English text of suggestion `index` (1-based) from the most recent list
    // offered to the user.
    std::optional<std::string> suggestion(const UserId& user, int index) const;

private:
    void apply_suggestions(const EventRecord& rec);

    Journal* journal_;
    OutboundSink* sink_;
    language::LanguageServices* language_;
    std::map<UserId, std::vector<std::string>> last_suggestions_;
};

}  // namespace expertloop::channel
