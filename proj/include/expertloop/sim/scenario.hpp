#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/core/time.hpp"
#include "expertloop/core/types.hpp"

namespace expertloop::sim {

struct ScenarioProfile {
    std::string patient_alias;  // empty when the form has no patient phone
    std::string attendant_alias;
    nlohmann::json form;
};

// One scripted action. `args` carries the action's fields as written in the
// script (text, fixture, index, label, task, rows, ...).
struct Step {
    Timestamp at{};
    std::string actor;
    std::string action;
    nlohmann::json args = nlohmann::json::object();
    int line = 0;
};

struct Expectation {
    std::string kind;  // message | no_message | reaction | event | task
    nlohmann::json args = nlohmann::json::object();
    int line = 0;
};

struct ScenarioScript {
    std::string name;
    std::string description;
    Timestamp start{};
    nlohmann::json config = nlohmann::json::object();  // overrides on the base config
    std::vector<ScenarioProfile> profiles;
    std::vector<Step> steps;
    std::vector<Expectation> expectations;
};

inline const std::set<std::string> kActions{"send_text",        "send_audio_fixture", "send_audio_bytes",
                                            "tap_suggestion",   "press_button",       "submit_correction_text",
                                            "advance_clock",    "onboard",            "upload_review",
                                            "api_decision",     "api_correction",     "restart"};

// Throws ScriptError with the offending line for schema problems:
// unknown keys or actions, decreasing step times, missing fields.
ScenarioScript parse_script(const std::string& yaml_text);
ScenarioScript load_script(const std::filesystem::path& path);

}  // namespace expertloop::sim
