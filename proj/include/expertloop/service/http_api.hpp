#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>

#include "expertloop/service/service.hpp"

namespace httplib {
class Server;
}

namespace expertloop::service {

using Clock = std::function<Timestamp()>;

// System time truncated to whole seconds.
Timestamp system_now();

// HTTP endpoints over a Service:
//   POST /webhook/channel, POST /onboard, POST /kb/review,
//   POST /expert/decision, POST /expert/correction,
//   GET /admin/tasks, GET /conversation/{user_id}, GET /health.
class HttpApi {
public:
    HttpApi(Service& service, Clock clock = system_now);
    ~HttpApi();

    // Binds to an ephemeral port when port is 0; returns the bound port or -1.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen_after_bind();
    void stop();

    httplib::Server& server() { return *server_; }

private:
    void install_routes();

    Service* service_;
    Clock clock_;
    std::unique_ptr<httplib::Server> server_;
};

// Live-mode driver: advances the service to the current time every
// `interval` until stopped.
class LiveScheduler {
public:
    LiveScheduler(Service& service, Seconds interval, Clock clock = system_now);
    ~LiveScheduler();
    void start();
    void stop();

private:
    Service* service_;
    Seconds interval_;
    Clock clock_;
    std::thread thread_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool stop_ = false;
};

}  // namespace expertloop::service
