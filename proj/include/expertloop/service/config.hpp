#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/core/time.hpp"
#include "expertloop/onboarding/registry.hpp"

namespace expertloop::service {

struct ProviderConfig {
    std::string llm = "mock";  // "mock" | "http"
    std::string llm_base_url = "http://127.0.0.1:8000";
    std::string llm_path = "/v1/chat/completions";
    std::string llm_model = "gpt-4";
    std::string llm_api_key_env = "EXPERTLOOP_LLM_API_KEY";
    std::string embedding = "hashed-bow";
    std::size_t embedding_dimension = 256;
    std::string translator = "mock";
    std::filesystem::path translations;  // mock dictionary
    std::string missing_phrase_policy = "tag";  // "tag" | "fail"
    std::string speech_to_text = "mock";
    std::filesystem::path audio_fixtures;
    std::string text_to_speech = "mock";
};

struct ServiceConfig {
    LocalZone zone = LocalZone::parse("+05:30");
    Seconds escalation_delay = std::chrono::hours(3);
    Seconds reminder_delay = std::chrono::hours(6);
    std::vector<TimeOfDay> digest_times{TimeOfDay::parse("08:00"), TimeOfDay::parse("12:00"), TimeOfDay::parse("16:00")};
    std::vector<TimeOfDay> seeker_reminder_times{TimeOfDay::parse("07:30"), TimeOfDay::parse("16:00")};
    TimeOfDay kb_digest_time = TimeOfDay::parse("20:00");
    TimeOfDay kb_apply_time = TimeOfDay::parse("03:00");
    bool allow_reroute_to_doctor = true;
    std::size_t retrieval_k = 3;
    ProviderConfig providers;
    std::filesystem::path corpus_dir;
    std::filesystem::path log_path;  // empty: in-memory log
    std::filesystem::path review_dir;  // empty: in-memory review sink
    std::filesystem::path audio_dir;  // empty: in-memory audio store
    std::string outbound_url;  // empty: deliveries are only logged
    std::string outbound_path = "/outbound";
    std::string admin_token;
    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    Seconds scheduler_interval{30};
    std::vector<onboarding::ExpertConfig> experts;
};

// Relative paths are resolved against `base_dir`. Unknown keys are rejected
// so that typos do not silently fall back to defaults.
ServiceConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ServiceConfig load_config(const std::filesystem::path& path);

}  // namespace expertloop::service
