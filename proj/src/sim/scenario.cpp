#include "expertloop/sim/scenario.hpp"

#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "expertloop/core/error.hpp"

namespace expertloop::sim {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& message) {
    throw Error(Errc::ScriptError, "line " + std::to_string(node.Mark().line + 1) + ": " + message);
}

// Plain scalars become booleans or integers where they look like one; quoted
// scalars always stay strings.
nlohmann::json to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined: return nullptr;
        case YAML::NodeType::Scalar: {
            const auto& s = node.Scalar();
            if (node.Tag() != "!") {
                if (s == "true") return true;
                if (s == "false") return false;
                static const std::regex integer("-?[0-9]{1,15}");
                if (std::regex_match(s, integer)) return std::stoll(s);
            }
            return s;
        }
        case YAML::NodeType::Sequence: {
            auto out = nlohmann::json::array();
            for (const auto& n : node) out.push_back(to_json(n));
            return out;
        }
        case YAML::NodeType::Map: {
            auto out = nlohmann::json::object();
            for (const auto& kv : node) out[kv.first.as<std::string>()] = to_json(kv.second);
            return out;
        }
    }
    return nullptr;
}

std::string scalar(const YAML::Node& map, const char* key, bool required = true) {
    auto n = map[key];
    if (!n) {
        if (required) fail(map, std::string("missing '") + key + "'");
        return {};
    }
    if (!n.IsScalar()) fail(n, std::string("'") + key + "' must be a scalar");
    return n.Scalar();
}

void allow_keys(const YAML::Node& map, const std::set<std::string>& keys) {
    for (const auto& kv : map) {
        auto k = kv.first.as<std::string>();
        if (!keys.count(k)) fail(kv.first, "unknown key '" + k + "'");
    }
}

Timestamp step_time(const YAML::Node& node, const std::string& spec, Timestamp start, Timestamp previous) {
    try {
        if (spec.empty()) return previous;
        if (spec[0] == '+') return previous + parse_duration(spec.substr(1));
        if (spec.find('T') != std::string::npos) return parse_rfc3339(spec);
        return start + parse_duration(spec);
    } catch (const Error& e) {
        fail(node, "bad time '" + spec + "': " + e.what());
    }
}

const std::map<std::string, std::vector<std::string>> kRequiredArgs{
    {"onboard", {"form"}},
    {"send_text", {"text"}},
    {"submit_correction_text", {"text"}},
    {"send_audio_fixture", {"fixture"}},
    {"send_audio_bytes", {"bytes"}},
    {"tap_suggestion", {"index"}},
    {"press_button", {"label"}},
    {"api_decision", {"decision"}},
    {"api_correction", {"text"}},
};

const std::set<std::string> kExpectationKinds{"message", "no_message", "reaction", "event", "task"};

}  // namespace

ScenarioScript parse_script(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw Error(Errc::ScriptError, std::string("YAML: ") + e.what());
    }
    if (!root.IsMap()) throw Error(Errc::ScriptError, "script must be a mapping");
    allow_keys(root, {"name", "description", "start", "config", "profiles", "steps", "expect"});
    ScenarioScript s;
    s.name = scalar(root, "name");
    s.description = scalar(root, "description", false);
    try {
        s.start = parse_rfc3339(scalar(root, "start"));
    } catch (const Error& e) {
        if (e.code() == Errc::ScriptError) throw;
        fail(root["start"], e.what());
    }
    if (root["config"]) {
        if (!root["config"].IsMap()) fail(root["config"], "'config' must be a mapping");
        s.config = to_json(root["config"]);
    }
    for (const auto& p : root["profiles"]) {
        allow_keys(p, {"patient", "attendant", "form"});
        if (!p["form"] || !p["form"].IsMap()) fail(p, "profile needs a 'form' mapping");
        s.profiles.push_back({scalar(p, "patient", false), scalar(p, "attendant", false), to_json(p["form"])});
    }
    Timestamp previous = s.start;
    for (const auto& n : root["steps"]) {
        if (!n.IsMap()) fail(n, "step must be a mapping");
        Step step;
        step.line = n.Mark().line + 1;
        step.action = scalar(n, "action");
        if (!kActions.count(step.action)) fail(n, "unknown action '" + step.action + "'");
        step.actor = scalar(n, "actor", step.action != "advance_clock" && step.action != "restart" &&
                                            step.action != "upload_review" && step.action != "onboard");
        step.at = step_time(n, scalar(n, "at", false), s.start, previous);
        if (step.at < previous) fail(n, "step times must not decrease");
        previous = step.at;
        for (const auto& kv : n) {
            auto k = kv.first.as<std::string>();
            if (k != "at" && k != "actor" && k != "action") step.args[k] = to_json(kv.second);
        }
        if (auto it = kRequiredArgs.find(step.action); it != kRequiredArgs.end()) {
            for (const auto& k : it->second) {
                if (!step.args.contains(k)) fail(n, "missing '" + k + "' for " + step.action);
            }
        }
        s.steps.push_back(std::move(step));
    }
    for (const auto& n : root["expect"]) {
        if (!n.IsMap() || n.size() != 1) fail(n, "expectation must be a single-key mapping");
        auto kv = *n.begin();
        Expectation e;
        e.kind = kv.first.as<std::string>();
        e.line = n.Mark().line + 1;
        if (!kExpectationKinds.count(e.kind)) fail(n, "unknown expectation '" + e.kind + "'");
        e.args = to_json(kv.second);
        if (!e.args.is_object()) fail(n, "expectation body must be a mapping");
        s.expectations.push_back(std::move(e));
    }
    return s;
}

ScenarioScript load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ScriptError, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_script(ss.str());
    } catch (const Error& e) {
        throw Error(Errc::ScriptError, path.filename().string() + ": " + e.what());
    }
}

}  // namespace expertloop::sim
