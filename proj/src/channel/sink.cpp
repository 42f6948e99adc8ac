#include "expertloop/channel/sink.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace expertloop::channel {

void CapturingSink::deliver(const Delivery& delivery) {
    std::lock_guard lock(mutex_);
    deliveries_.push_back(delivery);
}

std::vector<Delivery> CapturingSink::deliveries() const {
    std::lock_guard lock(mutex_);
    return deliveries_;
}

void CapturingSink::clear() {
    std::lock_guard lock(mutex_);
    deliveries_.clear();
}

void HttpSink::deliver(const Delivery& delivery) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(5, 0);
    auto res = client.Post(path_, delivery.payload.dump(), "application/json");
    if (!res || res->status >= 300) {
        spdlog::warn("outbound delivery of {} failed: {}", delivery.payload.value("message_id", "?"),
                     res ? std::to_string(res->status) : httplib::to_string(res.error()));
    }
}

}  // namespace expertloop::channel
