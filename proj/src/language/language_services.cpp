#include "expertloop/language/language_services.hpp"

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"

namespace expertloop::language {

LanguageServices::LanguageServices(std::shared_ptr<SpeechToText> stt, std::shared_ptr<TextToSpeech> tts,
                                   std::shared_ptr<Translator> translator, std::shared_ptr<AudioStore> audio)
    : stt_(std::move(stt)), tts_(std::move(tts)), translator_(std::move(translator)), audio_(std::move(audio)) {
    if (!stt_ || !tts_ || !translator_ || !audio_) throw Error(Errc::InvalidArgument, "missing language provider");
}

std::string LanguageServices::translate_with_retry(const std::string& input, LanguageCode from, LanguageCode to) {
    try {
        return translator_->translate(input, from, to);
    } catch (const Error& e) {
        if (e.code() != Errc::TranslationFailure) throw;
    }
    return translator_->translate(input, from, to);
}

NormalizedInbound LanguageServices::normalize_text(const std::string& input, LanguageCode language) {
    NormalizedInbound out;
    out.original_text = input;
    out.original_language = language;
    out.original_modality = Modality::Text;
    out.english_text = language == LanguageCode::EN ? input : translate_with_retry(input, language, LanguageCode::EN);
    return out;
}

NormalizedInbound LanguageServices::normalize_audio(const std::string& audio, LanguageCode language, Timestamp now) {
    auto transcript = stt_->transcribe(audio, language);
    NormalizedInbound out;
    out.original_text = transcript;
    out.original_language = language;
    out.original_modality = Modality::Audio;
    out.english_text =
        language == LanguageCode::EN ? transcript : translate_with_retry(transcript, language, LanguageCode::EN);
    out.audio_ref = audio_->put(audio, now);
    return out;
}

NormalizedInbound LanguageServices::normalize_tap(const std::string& english_suggestion, LanguageCode language) {
    NormalizedInbound out;
    out.original_text = english_suggestion;
    out.english_text = english_suggestion;
    out.original_language = language;
    out.original_modality = Modality::Tap;
    return out;
}

LocalizedOutbound LanguageServices::localize(const std::string& english_text, LanguageCode target, bool want_audio,
                                             Timestamp now) {
    LocalizedOutbound out;
    if (target == LanguageCode::EN) {
        out.text = text::truncate_at_sentence(english_text, text::kMessageLimit);
    } else {
        try {
            out.text = text::truncate_at_sentence(translate_with_retry(english_text, LanguageCode::EN, target),
                                                  text::kMessageLimit);
        } catch (const Error& e) {
            if (e.code() != Errc::TranslationFailure) throw;
            std::size_t room = text::kMessageLimit - text::char_count(kTranslationApology) - 1;
            out.text = text::truncate_at_sentence(english_text, room) + "\n" + std::string(kTranslationApology);
            out.fell_back_to_english = true;
        }
    }
    if (want_audio) {
        try {
            out.audio_ref = audio_->put(tts_->synthesize(out.text, out.fell_back_to_english ? LanguageCode::EN : target), now);
        } catch (const Error& e) {
            if (e.code() != Errc::SynthesisFailure) throw;
        }
    }
    return out;
}

std::string LanguageServices::localize_label(const std::string& english_label, LanguageCode target) {
    if (target == LanguageCode::EN) return text::truncate_words_with_ellipsis(english_label, text::kSuggestionLimit - 3);
    try {
        return text::truncate_words_with_ellipsis(translate_with_retry(english_label, LanguageCode::EN, target),
                                                  text::kSuggestionLimit - 3);
    } catch (const Error& e) {
        if (e.code() != Errc::TranslationFailure) throw;
        return text::truncate_words_with_ellipsis(english_label, text::kSuggestionLimit - 3);
    }
}

}  // namespace expertloop::language
