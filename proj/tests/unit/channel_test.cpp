#include <gtest/gtest.h>

#include <random>

#include "expertloop/channel/conversation.hpp"
#include "expertloop/channel/messenger.hpp"
#include "expertloop/channel/sink.hpp"
#include "expertloop/channel/wire.hpp"
#include "expertloop/core/error.hpp"
#include "expertloop/core/events.hpp"
#include "expertloop/core/journal.hpp"
#include "expertloop/core/text.hpp"
#include "expertloop/language/language_services.hpp"
#include "expertloop/language/providers.hpp"

using namespace expertloop;
using namespace expertloop::channel;

namespace {

const Timestamp kNow = parse_rfc3339("2023-11-20T09:00:00+05:30");

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return Errc::InvalidArgument;
}

std::string repeat(std::string_view unit, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += unit;
    return s;
}

OutboundAction with_id(OutboundAction a) {
    a.message_id = "out-1";
    return a;
}

}  // namespace

TEST(Wire, TextLimitCountsCharactersNotBytes) {
    EXPECT_NO_THROW(send_text("+91", repeat("अ", 700)).validate());
    EXPECT_EQ(code_of([] { send_text("+91", repeat("अ", 701)).validate(); }), Errc::OversizeBody);
    EXPECT_EQ(code_of([] { send_text("+91", repeat("a", 701)).validate(); }), Errc::OversizeBody);
    EXPECT_EQ(code_of([] { send_text("+91", "").validate(); }), Errc::SchemaViolation);
    EXPECT_EQ(code_of([] { send_text("", "hi").validate(); }), Errc::SchemaViolation);
}

TEST(Wire, SuggestionLabelsAreLimited) {
    EXPECT_NO_THROW(suggestion_list("+91", {repeat("x", 72), "b", "c"}).validate());
    EXPECT_EQ(code_of([] { suggestion_list("+91", {repeat("x", 73), "b", "c"}).validate(); }), Errc::SchemaViolation);
    EXPECT_EQ(code_of([] { suggestion_list("+91", {"a", "b"}).validate(); }), Errc::SchemaViolation);
}

TEST(Wire, ButtonMenusPerTrack) {
    EXPECT_EQ(verification_buttons(Track::DoctorTrack),
              (std::vector<std::string>{"Yes", "No", "Send to Patient Coordinator"}));
    EXPECT_EQ(verification_buttons(Track::CoordinatorTrack), (std::vector<std::string>{"Yes", "No", "Send to Doctor"}));
    auto menu = button_menu("+91", Track::DoctorTrack);
    EXPECT_EQ(menu.body, kVerifyPrompt);
    EXPECT_NO_THROW(menu.validate());
}

TEST(Wire, OutboundRoundTripsForEveryKind) {
    std::vector<OutboundAction> actions{
        send_text("+91", "Hello"),
        send_audio("+91", "abc123"),
        set_reaction("+91", "m-1", IconState::GreenTick),
        set_reaction("+91", "m-1", IconState::RedCross),
        set_reaction("+91", "m-1", IconState::QuestionMark),
        tagged_reply("+91", "m-1", "Corrected"),
        button_menu("+91", Track::CoordinatorTrack),
        suggestion_list("+91", {"a", "b", "c"}),
    };
    for (const auto& a : actions) {
        auto action = with_id(a);
        EXPECT_EQ(parse_outbound(render_outbound(action)), action) << render_outbound(action).dump();
    }
    auto j = render_outbound(with_id(set_reaction("+91", "m-1", IconState::GreenTick)));
    EXPECT_EQ(j.at("glyph"), "✅");
}

TEST(Wire, WebhookRoundTripsForEveryKind) {
    InboundMessage text{"+91", "w-1", kNow, InboundKind::Text, "hello", "", "", 0, std::nullopt};
    InboundMessage audio{"+91", "w-2", kNow, InboundKind::Audio, "", std::string("\x00\xff\x10voice", 8), "", 0, "w-1"};
    InboundMessage button{"+91", "w-3", kNow, InboundKind::ButtonPress, "", "", "Send to Doctor", 0, "m-9"};
    InboundMessage pick{"+91", "w-4", kNow, InboundKind::SuggestionPick, "", "", "", 3, std::nullopt};
    for (const auto& m : {text, audio, button, pick}) {
        EXPECT_EQ(parse_webhook(render_webhook(m).dump()), m) << render_webhook(m).dump();
    }
}

TEST(Wire, WebhookRejectsMalformedBodies) {
    auto base = nlohmann::json{{"sender", "+91"}, {"message_id", "w"}, {"timestamp", "2023-11-20T09:00:00Z"},
                               {"kind", "text"}, {"text", "hi"}};
    EXPECT_NO_THROW(parse_webhook(base.dump()));
    auto with = [&](const char* key, nlohmann::json v) {
        auto j = base;
        if (v.is_null()) j.erase(key);
        else j[key] = v;
        return j.dump();
    };
    EXPECT_EQ(code_of([&] { parse_webhook("not json"); }), Errc::SchemaViolation);
    EXPECT_EQ(code_of([&] { parse_webhook(with("sender", nullptr)); }), Errc::SchemaViolation);
    EXPECT_EQ(code_of([&] { parse_webhook(with("timestamp", "yesterday")); }), Errc::SchemaViolation);
    EXPECT_EQ(code_of([&] { parse_webhook(with("kind", "video")); }), Errc::SchemaViolation);
    auto button = base;
    button["kind"] = "button";
    button["button_label"] = "Maybe";
    EXPECT_EQ(code_of([&] { parse_webhook(button.dump()); }), Errc::SchemaViolation);
    auto pick = base;
    pick["kind"] = "suggestion";
    pick["suggestion_index"] = 4;
    EXPECT_EQ(code_of([&] { parse_webhook(pick.dump()); }), Errc::SchemaViolation);
    // unknown fields are ignored
    EXPECT_NO_THROW(parse_webhook(with("extra", 1)));
}

TEST(Wire, Base64RoundTripsRandomBytes) {
    std::mt19937 rng(7);
    for (int n = 0; n < 200; ++n) {
        std::string bytes(static_cast<std::size_t>(n), '\0');
        for (auto& c : bytes) c = static_cast<char>(rng() & 0xFF);
        ASSERT_EQ(base64_decode(base64_encode(bytes)), bytes);
    }
    EXPECT_EQ(base64_encode("Man"), "TWFu");
    EXPECT_EQ(base64_encode("Ma"), "TWE=");
    EXPECT_EQ(code_of([] { base64_decode("abc"); }), Errc::SchemaViolation);
}

class MessengerTest : public ::testing::Test {
protected:
    MessengerTest() {
        translator->add(LanguageCode::HI, "Hello.", "नमस्ते।");
        translator->add(LanguageCode::HI, "What to do next?", "आगे क्या करें?");
        seeker.user_id = "usr-1";
        seeker.language = LanguageCode::HI;
        seeker.channel_address = "+911";
    }

    MemoryEventLog log;
    Journal journal{log};
    CapturingSink sink;
    std::shared_ptr<language::MockTranslator> translator = std::make_shared<language::MockTranslator>();
    language::LanguageServices language{std::make_shared<language::MockSpeechToText>(),
                                        std::make_shared<language::MockTextToSpeech>(), translator,
                                        std::make_shared<language::AudioStore>()};
    Messenger messenger{journal, sink, language};
    ConversationStore conversations{journal};
    UserProfile seeker;
};

TEST_F(MessengerTest, LocalizesAndLogsBeforeDelivery) {
    auto sent = messenger.send_text(seeker, "Hello.", true, kNow);
    ASSERT_TRUE(sent.audio_id);
    auto d = sink.deliveries();
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d[0].payload.at("text"), "नमस्ते।");
    EXPECT_EQ(d[0].payload.at("message_id"), sent.text_id);
    EXPECT_EQ(d[1].payload.at("kind"), "audio");
    const auto& records = log.records();
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].event.kind, event_kind::kOutboundDispatched);
    EXPECT_EQ(d[0].offset, records[0].offset);
}

TEST_F(MessengerTest, SuggestionsAreLocalizedButResolvedInEnglish) {
    messenger.offer_suggestions(seeker, {"Question one?", "Question two?", "Question three?"}, kNow);
    auto d = sink.deliveries();
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].payload.at("header"), "आगे क्या करें?");
    EXPECT_EQ(d[0].payload.at("options").at(1), "[HI] Question two?");
    EXPECT_EQ(messenger.suggestion("usr-1", 2), "Question two?");
    EXPECT_FALSE(messenger.suggestion("usr-1", 4));
    EXPECT_FALSE(messenger.suggestion("usr-2", 1));
    EXPECT_EQ(code_of([&] { messenger.offer_suggestions(seeker, {"a", "b"}, kNow); }), Errc::InvalidArgument);
}

TEST_F(MessengerTest, ConversationShowsTheLatestReactionOnItsTarget) {
    auto sent = messenger.send_text(seeker, "Hello.", false, kNow);
    messenger.react(seeker, sent.text_id, IconState::QuestionMark, kNow);
    messenger.react(seeker, sent.text_id, IconState::GreenTick, kNow + std::chrono::minutes(5));
    auto conv = conversations.conversation("usr-1");
    ASSERT_EQ(conv.size(), 1u);
    EXPECT_EQ(conv[0].reaction, "✅");
    EXPECT_EQ(conv[0].text, "नमस्ते।");
    EXPECT_FALSE(conv[0].inbound);
}
