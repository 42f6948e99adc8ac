#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "expertloop/core/error.hpp"
#include "expertloop/service/http_api.hpp"

using namespace expertloop;

namespace {
service::HttpApi* g_api = nullptr;
void on_signal(int) {
    if (g_api) g_api->stop();
}
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Expert-in-the-loop chatbot service"};
    std::string config_path = "data/config.json";
    std::string log_path;
    std::optional<int> port;
    bool verbose = false;
    app.add_option("--config", config_path, "Service configuration (JSON)");
    app.add_option("--log", log_path, "Event log path (overrides log_path)");
    app.add_option("--port", port, "Listen port (overrides listen_port)");
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    CLI11_PARSE(app, argc, argv);
    if (verbose) spdlog::set_level(spdlog::level::debug);

    try {
        auto config = service::load_config(config_path);
        if (!log_path.empty()) config.log_path = log_path;
        if (port) config.listen_port = *port;
        if (config.log_path.empty()) spdlog::warn("no log_path configured: state is lost on exit");

        service::Service svc(config);
        svc.start(service::system_now());
        service::HttpApi api(svc);
        int bound = api.bind(config.listen_host, config.listen_port);
        if (bound < 0) {
            spdlog::error("cannot bind {}:{}", config.listen_host, config.listen_port);
            return 1;
        }
        service::LiveScheduler scheduler(svc, config.scheduler_interval);
        scheduler.start();
        g_api = &api;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        spdlog::info("listening on {}:{}", config.listen_host, bound);
        api.listen_after_bind();
        scheduler.stop();
        g_api = nullptr;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
