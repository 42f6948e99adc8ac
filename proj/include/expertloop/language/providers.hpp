#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "expertloop/core/types.hpp"

namespace expertloop::language {

class SpeechToText {
public:
    virtual ~SpeechToText() = default;
    // Throws Error(TranscriptionFailure).
    virtual std::string transcribe(const std::string& audio, LanguageCode language) = 0;
};

class TextToSpeech {
public:
    virtual ~TextToSpeech() = default;
    // Throws Error(SynthesisFailure).
    virtual std::string synthesize(const std::string& text, LanguageCode language) = 0;
};

class Translator {
public:
    virtual ~Translator() = default;
    // Throws Error(TranslationFailure).
    virtual std::string translate(const std::string& text, LanguageCode from, LanguageCode to) = 0;
};

enum class MissingPhrasePolicy { TagPassThrough, Fail };

// Phrase dictionary keyed by English text. Lookups try the whole text, then
// sentence by sentence. With TagPassThrough an unknown phrase comes back as
// "[HI] <text>"; with Fail it raises TranslationFailure.
class MockTranslator final : public Translator {
public:
    explicit MockTranslator(MissingPhrasePolicy policy = MissingPhrasePolicy::TagPassThrough) : policy_(policy) {}

    // JSON: {"HI": {"<english>": "<hindi>", ...}, "KN": {...}}
    static MockTranslator from_file(const std::filesystem::path& path,
                                    MissingPhrasePolicy policy = MissingPhrasePolicy::TagPassThrough);

    void add(LanguageCode lang, const std::string& english, const std::string& native);
    std::string translate(const std::string& text, LanguageCode from, LanguageCode to) override;

    MissingPhrasePolicy policy() const { return policy_; }
    void set_policy(MissingPhrasePolicy policy) { policy_ = policy; }

private:
    std::string lookup(const std::map<std::string, std::string>& table, const std::string& text, LanguageCode tag);

    MissingPhrasePolicy policy_;
    std::map<LanguageCode, std::map<std::string, std::string>> to_native_;
    std::map<LanguageCode, std::map<std::string, std::string>> to_english_;
};

struct AudioFixture {
    LanguageCode language = LanguageCode::EN;
    std::string transcript;
};

// Fixture audio is the bytes "fixture:<name>"; anything else fails to
// transcribe.
class MockSpeechToText final : public SpeechToText {
public:
    MockSpeechToText() = default;
    explicit MockSpeechToText(std::map<std::string, AudioFixture> fixtures) : fixtures_(std::move(fixtures)) {}

    // JSON: {"<name>": {"language": "HI", "transcript": "..."}}
    static MockSpeechToText from_file(const std::filesystem::path& path);

    static std::string fixture_audio(std::string_view name) { return "fixture:" + std::string(name); }

    std::string transcribe(const std::string& audio, LanguageCode language) override;
    const std::map<std::string, AudioFixture>& fixtures() const { return fixtures_; }

private:
    std::map<std::string, AudioFixture> fixtures_;
};

// Produces "AUDIO[<lang>]:<text>" so tests can see exactly what was spoken.
class MockTextToSpeech final : public TextToSpeech {
public:
    std::string synthesize(const std::string& text, LanguageCode language) override;
};

}  // namespace expertloop::language
