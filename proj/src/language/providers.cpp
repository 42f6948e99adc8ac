#include "expertloop/language/providers.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"

namespace expertloop::language {

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path.string());
    return nlohmann::json::parse(in);
}

}  // namespace

MockTranslator MockTranslator::from_file(const std::filesystem::path& path, MissingPhrasePolicy policy) {
    MockTranslator t(policy);
    auto doc = read_json(path);
    for (const auto& [lang, table] : doc.items()) {
        auto code = parse_language(lang);
        for (const auto& [english, native] : table.items()) t.add(code, english, native.get<std::string>());
    }
    return t;
}

void MockTranslator::add(LanguageCode lang, const std::string& english, const std::string& native) {
    to_native_[lang][text::trim(english)] = text::trim(native);
    to_english_[lang][text::trim(native)] = text::trim(english);
}

std::string MockTranslator::lookup(const std::map<std::string, std::string>& table, const std::string& input,
                                   LanguageCode tag) {
    auto key = text::trim(input);
    if (auto it = table.find(key); it != table.end()) return it->second;
    std::vector<std::string> out;
    bool complete = true;
    for (const auto& line : text::split(key, '\n')) {
        std::vector<std::string> parts;
        for (const auto& s : text::sentences(line)) {
            auto it = table.find(s);
            if (it == table.end()) {
                complete = false;
                break;
            }
            parts.push_back(it->second);
        }
        if (!complete) break;
        out.push_back(text::join(parts, " "));
    }
    if (complete && !key.empty()) return text::join(out, "\n");
    if (policy_ == MissingPhrasePolicy::Fail) {
        throw Error(Errc::TranslationFailure, "no " + std::string(to_string(tag)) + " phrase for: " + key);
    }
    return "[" + std::string(to_string(tag)) + "] " + key;
}

std::string MockTranslator::translate(const std::string& input, LanguageCode from, LanguageCode to) {
    if (from == to) return input;
    if (from == LanguageCode::EN) return lookup(to_native_[to], input, to);
    if (to == LanguageCode::EN) return lookup(to_english_[from], input, LanguageCode::EN);
    // pivot through English
    return translate(translate(input, from, LanguageCode::EN), LanguageCode::EN, to);
}

MockSpeechToText MockSpeechToText::from_file(const std::filesystem::path& path) {
    std::map<std::string, AudioFixture> fixtures;
    auto doc = read_json(path);
    for (const auto& [name, f] : doc.items()) {
        fixtures[name] = {parse_language(f.at("language").get<std::string>()), f.at("transcript").get<std::string>()};
    }
    return MockSpeechToText(std::move(fixtures));
}

std::string MockSpeechToText::transcribe(const std::string& audio, LanguageCode language) {
    constexpr std::string_view prefix = "fixture:";
    if (!audio.starts_with(prefix)) throw Error(Errc::TranscriptionFailure, "unrecognised audio");
    auto it = fixtures_.find(audio.substr(prefix.size()));
    if (it == fixtures_.end()) throw Error(Errc::TranscriptionFailure, "unknown audio fixture " + audio);
    if (it->second.language != language) {
        throw Error(Errc::TranscriptionFailure, "fixture language does not match the language hint");
    }
    return it->second.transcript;
}

std::string MockTextToSpeech::synthesize(const std::string& text, LanguageCode language) {
    if (text.empty()) throw Error(Errc::SynthesisFailure, "nothing to speak");
    return "AUDIO[" + std::string(to_string(language)) + "]:" + text;
}

}  // namespace expertloop::language
