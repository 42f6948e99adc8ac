#include "expertloop/service/http_api.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "expertloop/core/error.hpp"
#include "expertloop/kb/review_sheet.hpp"

namespace expertloop::service {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
    send_json(res, http_status_for(e.code()), {{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
}

nlohmann::json parse_body(const httplib::Request& req) {
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::SchemaViolation, std::string("request body is not JSON: ") + e.what());
    }
}

std::string required(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
        throw Error(Errc::SchemaViolation, std::string("missing string field ") + key);
    }
    return j[key].get<std::string>();
}

template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send_error(res, e);
        } catch (const std::exception& e) {
            spdlog::error("{} {} failed: {}", req.method, req.path, e.what());
            send_json(res, 500, {{"error", "Internal"}, {"message", e.what()}});
        }
    };
}

}  // namespace

Timestamp system_now() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

HttpApi::HttpApi(Service& service, Clock clock)
    : service_(&service), clock_(std::move(clock)), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind(const std::string& host, int port) {
    if (port == 0) return server_->bind_to_any_port(host);
    return server_->bind_to_port(host, port) ? port : -1;
}

void HttpApi::listen_after_bind() { server_->listen_after_bind(); }

void HttpApi::stop() {
    if (server_->is_running()) server_->stop();
}

void HttpApi::install_routes() {
    auto& s = *server_;

    s.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); });

    s.Post("/webhook/channel", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto message = channel::parse_webhook(req.body);
        send_json(res, 200, service_->handle_inbound(message, clock_()));
    }));

    s.Post("/onboard", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto form = onboarding::parse_form(parse_body(req));
        auto result = service_->onboard(form, clock_());
        send_json(res, 201, {{"created", result.created}});
    }));

    s.Post("/kb/review", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto rows = kb::parse_csv(req.body);
        auto queued = service_->review(rows, clock_());
        send_json(res, 200, {{"rows", rows.size()}, {"queued", queued}});
    }));

    s.Post("/expert/decision", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req);
        auto decision = parse_decision(required(body, "decision"));
        auto r = service_->decide(required(body, "expert_id"), required(body, "task_id"), decision, clock_());
        nlohmann::json out{{"task_id", r.task_id}, {"from", to_string(r.from)}, {"to", to_string(r.to)}};
        if (r.successor_task_id) out["successor_task_id"] = *r.successor_task_id;
        send_json(res, 200, out);
    }));

    s.Post("/expert/correction", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req);
        auto r = service_->correct(required(body, "expert_id"), required(body, "task_id"), required(body, "text"),
                                   clock_());
        send_json(res, 200, {{"task_id", r.task_id}, {"final_answer", r.final_answer},
                             {"seeker_message_id", r.seeker_message_id}});
    }));

    s.Get("/admin/tasks", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto& token = service_->config().admin_token;
        if (!token.empty() && req.get_header_value("X-Admin-Token") != token) {
            send_json(res, 401, {{"error", "Unauthorized"}, {"message", "missing or wrong X-Admin-Token"}});
            return;
        }
        auto state = req.has_param("state") ? req.get_param_value("state") : std::string("pending");
        std::optional<UserId> expert;
        if (req.has_param("expert_id")) expert = req.get_param_value("expert_id");
        send_json(res, 200, {{"tasks", service_->tasks_json(state, expert)}});
    }));

    s.Get(R"(/conversation/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service_->conversation_json(req.matches[1].str()));
    }));
}

LiveScheduler::LiveScheduler(Service& service, Seconds interval, Clock clock)
    : service_(&service), interval_(interval), clock_(std::move(clock)) {}

LiveScheduler::~LiveScheduler() { stop(); }

void LiveScheduler::start() {
    thread_ = std::thread([this] {
        std::unique_lock lock(mutex_);
        while (!stop_) {
            lock.unlock();
            try {
                service_->advance_to(clock_());
            } catch (const std::exception& e) {
                spdlog::error("scheduler firing failed: {}", e.what());
            }
            lock.lock();
            cv_.wait_for(lock, interval_, [this] { return stop_; });
        }
    });
}

void LiveScheduler::stop() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
}

}  // namespace expertloop::service
