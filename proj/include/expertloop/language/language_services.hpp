#pragma once

#include <memory>
#include <optional>
#include <string>

#include "expertloop/core/types.hpp"
#include "expertloop/language/audio_store.hpp"
#include "expertloop/language/providers.hpp"

namespace expertloop::language {

struct NormalizedInbound {
    std::string english_text;
    std::string original_text;
    LanguageCode original_language = LanguageCode::EN;
    Modality original_modality = Modality::Text;
    std::optional<std::string> audio_ref;
};

struct LocalizedOutbound {
    std::string text;
    std::optional<std::string> audio_ref;
    bool fell_back_to_english = false;
};

inline constexpr std::string_view kAudioNotUnderstood =
    "Sorry, we could not understand your message. Please type your question instead.";
inline constexpr std::string_view kTranslationApology =
    "Sorry, this message could not be translated into your language.";

class LanguageServices {
public:
    LanguageServices(std::shared_ptr<SpeechToText> stt, std::shared_ptr<TextToSpeech> tts,
                     std::shared_ptr<Translator> translator, std::shared_ptr<AudioStore> audio);

    // Throws TranscriptionFailure or TranslationFailure (after one retry);
    // callers answer both with kAudioNotUnderstood.
    NormalizedInbound normalize_text(const std::string& text, LanguageCode language);
    NormalizedInbound normalize_audio(const std::string& audio, LanguageCode language, Timestamp now);
    NormalizedInbound normalize_tap(const std::string& english_suggestion, LanguageCode language);

    // Never throws for provider failures: translation failure falls back to
    // English plus an apology line, synthesis failure drops the audio. The
    // result is at most 700 characters.
    LocalizedOutbound localize(const std::string& english_text, LanguageCode target, bool want_audio, Timestamp now);

    // Suggestion labels: translated and refitted to 72 characters; English on
    // failure.
    std::string localize_label(const std::string& english_label, LanguageCode target);

    AudioStore& audio() { return *audio_; }

private:
    std::string translate_with_retry(const std::string& text, LanguageCode from, LanguageCode to);

    std::shared_ptr<SpeechToText> stt_;
    std::shared_ptr<TextToSpeech> tts_;
    std::shared_ptr<Translator> translator_;
    std::shared_ptr<AudioStore> audio_;
};

}  // namespace expertloop::language
