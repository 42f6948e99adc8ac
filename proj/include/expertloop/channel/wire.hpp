#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/core/time.hpp"
#include "expertloop/core/types.hpp"

namespace expertloop::channel {

inline constexpr std::string_view kSuggestionsHeader = "What to do next?";
inline constexpr std::string_view kVerifyPrompt = "Is the answer accurate and complete?";
inline constexpr std::string_view kButtonYes = "Yes";
inline constexpr std::string_view kButtonNo = "No";
inline constexpr std::string_view kButtonToCoordinator = "Send to Patient Coordinator";
inline constexpr std::string_view kButtonToDoctor = "Send to Doctor";

enum class ActionKind { SendText, SendAudio, SetReaction, TaggedReply, ButtonMenu, SuggestionList };

std::string_view to_string(ActionKind kind);
ActionKind parse_action_kind(std::string_view wire_kind);

struct OutboundAction {
    ActionKind kind = ActionKind::SendText;
    ChannelAddress recipient;
    // SendText / TaggedReply text, SendAudio handle, ButtonMenu and
    // SuggestionList header.
    std::string body;
    std::optional<MessageId> target_message_id;
    std::optional<IconState> icon;
    std::vector<std::string> options;
    // Assigned when the action is dispatched.
    MessageId message_id;

    friend bool operator==(const OutboundAction&, const OutboundAction&) = default;

    // Throws SchemaViolation for structural problems, OversizeBody for
    // text over 700 characters.
    void validate() const;
};

OutboundAction send_text(ChannelAddress to, std::string body);
OutboundAction send_audio(ChannelAddress to, std::string handle);
OutboundAction set_reaction(ChannelAddress to, MessageId target, IconState icon);
OutboundAction tagged_reply(ChannelAddress to, MessageId target, std::string body);
OutboundAction button_menu(ChannelAddress to, Track track);
OutboundAction suggestion_list(ChannelAddress to, std::vector<std::string> labels,
                               std::string header = std::string(kSuggestionsHeader));

// Labels for the verification menu on a track: Yes, No, and the reroute label.
std::vector<std::string> verification_buttons(Track track);

enum class InboundKind { Text, Audio, ButtonPress, SuggestionPick };

std::string_view to_string(InboundKind kind);

struct InboundMessage {
    ChannelAddress sender;
    MessageId message_id;
    Timestamp timestamp{};
    InboundKind kind = InboundKind::Text;
    std::string text;
    std::string audio;  // raw bytes, decoded from base64
    std::string button_label;
    int suggestion_index = 0;
    // The message this one answers (button menus, quoted replies).
    std::optional<MessageId> context_message_id;

    friend bool operator==(const InboundMessage&, const InboundMessage&) = default;
};

// Inbound webhook codec. Unknown fields are ignored; structural problems
// raise SchemaViolation.
InboundMessage parse_webhook(std::string_view payload);
nlohmann::json render_webhook(const InboundMessage& message);

// Outbound codec: one JSON payload per action. parse_outbound is the client
// side used by the simulator and tests.
nlohmann::json render_outbound(const OutboundAction& action);
OutboundAction parse_outbound(const nlohmann::json& payload);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace expertloop::channel
