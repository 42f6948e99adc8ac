#include "expertloop/channel/wire.hpp"

#include <openssl/evp.h>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"

namespace expertloop::channel {

namespace {

const std::string& required_string(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
        throw Error(Errc::SchemaViolation, std::string("missing or empty field: ") + key);
    }
    return it->get_ref<const std::string&>();
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(Errc::SchemaViolation, std::string("field is not a string: ") + key);
    return it->get<std::string>();
}

bool is_button_label(std::string_view label) {
    return label == kButtonYes || label == kButtonNo || label == kButtonToCoordinator || label == kButtonToDoctor;
}

}  // namespace

std::string_view to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::SendText: return "text";
        case ActionKind::SendAudio: return "audio";
        case ActionKind::SetReaction: return "reaction";
        case ActionKind::TaggedReply: return "tagged_reply";
        case ActionKind::ButtonMenu: return "buttons";
        case ActionKind::SuggestionList: return "suggestions";
    }
    return "?";
}

ActionKind parse_action_kind(std::string_view s) {
    for (auto k : {ActionKind::SendText, ActionKind::SendAudio, ActionKind::SetReaction, ActionKind::TaggedReply,
                   ActionKind::ButtonMenu, ActionKind::SuggestionList}) {
        if (to_string(k) == s) return k;
    }
    throw Error(Errc::SchemaViolation, "unknown outbound kind: " + std::string(s));
}

std::string_view to_string(InboundKind kind) {
    switch (kind) {
        case InboundKind::Text: return "text";
        case InboundKind::Audio: return "audio";
        case InboundKind::ButtonPress: return "button";
        case InboundKind::SuggestionPick: return "suggestion";
    }
    return "?";
}

std::vector<std::string> verification_buttons(Track track) {
    return {std::string(kButtonYes), std::string(kButtonNo),
            std::string(track == Track::DoctorTrack ? kButtonToCoordinator : kButtonToDoctor)};
}

void OutboundAction::validate() const {
    if (recipient.empty()) throw Error(Errc::SchemaViolation, "outbound action without recipient");
    switch (kind) {
        case ActionKind::SendText:
        case ActionKind::TaggedReply:
            if (body.empty()) throw Error(Errc::SchemaViolation, "empty text body");
            if (text::char_count(body) > text::kMessageLimit) {
                throw Error(Errc::OversizeBody, std::to_string(text::char_count(body)) + " characters");
            }
            if (kind == ActionKind::TaggedReply && !target_message_id) {
                throw Error(Errc::SchemaViolation, "tagged reply without target");
            }
            break;
        case ActionKind::SendAudio:
            if (body.empty()) throw Error(Errc::SchemaViolation, "audio without handle");
            break;
        case ActionKind::SetReaction:
            if (!target_message_id || !icon) throw Error(Errc::SchemaViolation, "reaction needs target and icon");
            break;
        case ActionKind::ButtonMenu:
            if (options.size() != 3 || options[0] != kButtonYes || options[1] != kButtonNo ||
                (options[2] != kButtonToCoordinator && options[2] != kButtonToDoctor)) {
                throw Error(Errc::SchemaViolation, "button menu must be Yes, No and one reroute label");
            }
            break;
        case ActionKind::SuggestionList:
            if (options.size() != 3) throw Error(Errc::SchemaViolation, "suggestion list needs three labels");
            for (const auto& o : options) {
                if (o.empty() || text::char_count(o) > text::kSuggestionLimit) {
                    throw Error(Errc::SchemaViolation, "suggestion label empty or over 72 characters: " + o);
                }
            }
            break;
    }
}

OutboundAction send_text(ChannelAddress to, std::string body) {
    return {ActionKind::SendText, std::move(to), std::move(body), std::nullopt, std::nullopt, {}, {}};
}

OutboundAction send_audio(ChannelAddress to, std::string handle) {
    return {ActionKind::SendAudio, std::move(to), std::move(handle), std::nullopt, std::nullopt, {}, {}};
}

OutboundAction set_reaction(ChannelAddress to, MessageId target, IconState icon) {
    return {ActionKind::SetReaction, std::move(to), {}, std::move(target), icon, {}, {}};
}

OutboundAction tagged_reply(ChannelAddress to, MessageId target, std::string body) {
    return {ActionKind::TaggedReply, std::move(to), std::move(body), std::move(target), std::nullopt, {}, {}};
}

OutboundAction button_menu(ChannelAddress to, Track track) {
    return {ActionKind::ButtonMenu, std::move(to), std::string(kVerifyPrompt), std::nullopt, std::nullopt,
            verification_buttons(track), {}};
}

OutboundAction suggestion_list(ChannelAddress to, std::vector<std::string> labels, std::string header) {
    return {ActionKind::SuggestionList, std::move(to), std::move(header), std::nullopt, std::nullopt,
            std::move(labels), {}};
}

InboundMessage parse_webhook(std::string_view payload) {
    auto j = nlohmann::json::parse(payload, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(Errc::SchemaViolation, "body is not a JSON object");

    InboundMessage m;
    m.sender = required_string(j, "sender");
    m.message_id = required_string(j, "message_id");
    try {
        m.timestamp = parse_rfc3339(required_string(j, "timestamp"));
    } catch (const Error& e) {
        if (e.code() == Errc::SchemaViolation) throw;
        throw Error(Errc::SchemaViolation, "bad timestamp");
    }
    m.context_message_id = optional_string(j, "context_message_id");

    const auto& kind = required_string(j, "kind");
    if (kind == "text") {
        m.kind = InboundKind::Text;
        m.text = required_string(j, "text");
    } else if (kind == "audio") {
        m.kind = InboundKind::Audio;
        m.audio = base64_decode(required_string(j, "audio_b64"));
        if (m.audio.empty()) throw Error(Errc::SchemaViolation, "empty audio");
    } else if (kind == "button") {
        m.kind = InboundKind::ButtonPress;
        m.button_label = required_string(j, "button_label");
        if (!is_button_label(m.button_label)) throw Error(Errc::SchemaViolation, "unknown button label");
    } else if (kind == "suggestion") {
        m.kind = InboundKind::SuggestionPick;
        auto it = j.find("suggestion_index");
        if (it == j.end() || !it->is_number_integer()) throw Error(Errc::SchemaViolation, "missing suggestion_index");
        m.suggestion_index = it->get<int>();
        if (m.suggestion_index < 1 || m.suggestion_index > 3) {
            throw Error(Errc::SchemaViolation, "suggestion_index out of range");
        }
    } else {
        throw Error(Errc::SchemaViolation, "unknown inbound kind: " + kind);
    }
    return m;
}

nlohmann::json render_webhook(const InboundMessage& m) {
    nlohmann::json j{{"sender", m.sender},
                     {"message_id", m.message_id},
                     {"timestamp", format_rfc3339(m.timestamp)},
                     {"kind", to_string(m.kind)}};
    switch (m.kind) {
        case InboundKind::Text: j["text"] = m.text; break;
        case InboundKind::Audio: j["audio_b64"] = base64_encode(m.audio); break;
        case InboundKind::ButtonPress: j["button_label"] = m.button_label; break;
        case InboundKind::SuggestionPick: j["suggestion_index"] = m.suggestion_index; break;
    }
    if (m.context_message_id) j["context_message_id"] = *m.context_message_id;
    return j;
}

nlohmann::json render_outbound(const OutboundAction& a) {
    a.validate();
    nlohmann::json j{{"recipient", a.recipient}, {"kind", to_string(a.kind)}, {"message_id", a.message_id}};
    switch (a.kind) {
        case ActionKind::SendText: j["text"] = a.body; break;
        case ActionKind::SendAudio: j["audio_ref"] = a.body; break;
        case ActionKind::SetReaction:
            j["target_message_id"] = *a.target_message_id;
            j["glyph"] = glyph(*a.icon);
            break;
        case ActionKind::TaggedReply:
            j["target_message_id"] = *a.target_message_id;
            j["text"] = a.body;
            break;
        case ActionKind::ButtonMenu:
            j["text"] = a.body;
            j["buttons"] = a.options;
            break;
        case ActionKind::SuggestionList:
            j["header"] = a.body;
            j["options"] = a.options;
            break;
    }
    return j;
}

OutboundAction parse_outbound(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(Errc::SchemaViolation, "outbound payload is not an object");
    OutboundAction a;
    a.recipient = required_string(j, "recipient");
    a.kind = parse_action_kind(required_string(j, "kind"));
    a.message_id = optional_string(j, "message_id").value_or("");
    auto strings = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_array()) throw Error(Errc::SchemaViolation, std::string("missing ") + key);
        return it->get<std::vector<std::string>>();
    };
    switch (a.kind) {
        case ActionKind::SendText: a.body = required_string(j, "text"); break;
        case ActionKind::SendAudio: a.body = required_string(j, "audio_ref"); break;
        case ActionKind::SetReaction: {
            a.target_message_id = required_string(j, "target_message_id");
            a.icon = icon_from_glyph(required_string(j, "glyph"));
            if (!a.icon) throw Error(Errc::SchemaViolation, "unknown glyph");
            break;
        }
        case ActionKind::TaggedReply:
            a.target_message_id = required_string(j, "target_message_id");
            a.body = required_string(j, "text");
            break;
        case ActionKind::ButtonMenu:
            a.body = required_string(j, "text");
            a.options = strings("buttons");
            break;
        case ActionKind::SuggestionList:
            a.body = required_string(j, "header");
            a.options = strings("options");
            break;
    }
    a.validate();
    return a;
}

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view encoded) {
    std::string in;
    for (char c : encoded) {
        if (c != '\n' && c != '\r' && c != ' ') in += c;
    }
    if (in.size() % 4 != 0) throw Error(Errc::SchemaViolation, "invalid base64 length");
    std::string out(3 * in.size() / 4, '\0');
    int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(in.data()), static_cast<int>(in.size()));
    if (n < 0) throw Error(Errc::SchemaViolation, "invalid base64");
    std::size_t pad = 0;
    if (!in.empty() && in.back() == '=') ++pad;
    if (in.size() > 1 && in[in.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

}  // namespace expertloop::channel
