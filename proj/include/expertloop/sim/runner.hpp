#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/core/events.hpp"
#include "expertloop/sim/scenario.hpp"

namespace expertloop::sim {

struct RunOptions {
    // Base configuration; the script's `config` block is merged over it.
    std::filesystem::path config_path;
    // Simulates a crash: after this many steps the service is discarded and
    // a new one is rebuilt from the event log before the remaining steps run.
    std::optional<std::size_t> restart_after_step;
    std::uint64_t seed = 0;
};

struct ExpectationResult {
    Expectation expectation;
    bool passed = false;
    std::string detail;
};

// An outbound payload as delivered, with the recipient's script alias.
struct TranscriptEntry {
    Timestamp at{};
    std::uint64_t offset = 0;
    std::string recipient;
    nlohmann::json payload;
};

using Edge = std::pair<std::string, std::string>;  // ("" for creation, state)

struct RunResult {
    std::string transcript;
    std::vector<TranscriptEntry> outbound;
    std::vector<ExpectationResult> expectations;
    std::vector<EventRecord> events;
    nlohmann::json snapshot;
    std::set<Edge> edges;
    std::vector<std::string> errors;  // step failures, e.g. rejected API calls
    bool passed() const;
};

RunResult run_scenario(const ScenarioScript& script, const RunOptions& options);

// All TaskState edges the workflow can take, creation included.
std::set<Edge> all_task_edges();

std::string default_config_path();

}  // namespace expertloop::sim
