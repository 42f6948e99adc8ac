#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "expertloop/core/error.hpp"
#include "expertloop/sim/random_script.hpp"
#include "expertloop/sim/runner.hpp"

namespace fs = std::filesystem;
using namespace expertloop;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw Error(Errc::StorageFailure, "cannot write " + path.string());
}

bool report(const std::string& name, const sim::RunResult& r) {
    for (const auto& e : r.expectations) std::cout << (e.passed ? "  PASS " : "  FAIL ") << e.detail << "\n";
    for (const auto& err : r.errors) std::cout << "  ERROR " << err << "\n";
    std::cout << (r.passed() ? "PASS " : "FAIL ") << name << " (" << r.expectations.size() << " expectations, "
              << r.outbound.size() << " outbound messages)\n";
    return r.passed();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scenario simulator for the expert-in-the-loop chatbot service"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config;
    std::string transcript_out;
    std::uint64_t seed = 0;
    app.add_option("--config", config, "Base service configuration (JSON)");
    app.add_option("--transcript-out", transcript_out, "Transcript file (run, random) or directory (suite)");
    app.add_option("--seed", seed, "Seed for randomized scenarios");

    auto* run = app.add_subcommand("run", "Run one scenario script");
    std::string script_path;
    std::optional<std::size_t> restart_after;
    run->add_option("script", script_path, "Scenario YAML")->required();
    run->add_option("--restart-after", restart_after, "Rebuild the service from its log after N steps");

    auto* suite = app.add_subcommand("suite", "Run every *.yaml in a directory and report edge coverage");
    std::string suite_dir;
    suite->add_option("dir", suite_dir, "Scenario directory")->required();

    auto* random = app.add_subcommand("random", "Run a randomized scenario generated from --seed");
    std::size_t steps = 200;
    random->add_option("--steps", steps, "Number of random steps");

    CLI11_PARSE(app, argc, argv);

    sim::RunOptions options;
    options.config_path = config;
    options.seed = seed;
    try {
        if (*run) {
            options.restart_after_step = restart_after;
            auto script = sim::load_script(script_path);
            auto result = sim::run_scenario(script, options);
            if (!transcript_out.empty()) write_file(transcript_out, result.transcript);
            return report(script.name, result) ? 0 : 1;
        }
        if (*random) {
            auto script = sim::random_script(seed, steps);
            auto result = sim::run_scenario(script, options);
            if (!transcript_out.empty()) write_file(transcript_out, result.transcript);
            std::cout << "random seed " << seed << ": " << result.events.size() << " events, "
                      << result.outbound.size() << " outbound messages, " << result.edges.size()
                      << " task edges exercised\n";
            return report(script.name, result) ? 0 : 1;
        }
        std::vector<fs::path> scripts;
        for (const auto& entry : fs::directory_iterator(suite_dir)) {
            if (entry.path().extension() == ".yaml") scripts.push_back(entry.path());
        }
        std::sort(scripts.begin(), scripts.end());
        bool all = true;
        std::map<sim::Edge, std::size_t> coverage;
        for (auto e : sim::all_task_edges()) coverage[e] = 0;
        for (const auto& path : scripts) {
            auto script = sim::load_script(path);
            auto result = sim::run_scenario(script, options);
            all = report(script.name, result) && all;
            for (const auto& e : result.edges) ++coverage[e];
            if (!transcript_out.empty()) write_file(fs::path(transcript_out) / (path.stem().string() + ".txt"), result.transcript);
        }
        std::cout << "edge coverage:\n";
        bool covered = true;
        for (const auto& [edge, n] : coverage) {
            std::cout << "  " << (edge.first.empty() ? "(created)" : edge.first) << " -> " << edge.second << ": " << n
                      << " scenario(s)\n";
            covered = covered && n > 0;
        }
        std::cout << (covered ? "all task edges covered\n" : "some task edges are not covered\n");
        return all && covered ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}
