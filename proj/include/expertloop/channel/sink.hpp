#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/core/time.hpp"

namespace expertloop::channel {

struct Delivery {
    std::uint64_t offset = 0;  // of the OutboundDispatched event
    Timestamp at{};
    nlohmann::json payload;
};

class OutboundSink {
public:
    virtual ~OutboundSink() = default;
    // Delivery is best effort: the event log is the record of what was sent.
    virtual void deliver(const Delivery& delivery) = 0;
};

class CapturingSink final : public OutboundSink {
public:
    void deliver(const Delivery& delivery) override;
    std::vector<Delivery> deliveries() const;
    void clear();

private:
    mutable std::mutex mutex_;
    std::vector<Delivery> deliveries_;
};

// POSTs each payload as JSON to a configured URL.
class HttpSink final : public OutboundSink {
public:
    HttpSink(std::string base_url, std::string path) : base_url_(std::move(base_url)), path_(std::move(path)) {}
    void deliver(const Delivery& delivery) override;

private:
    std::string base_url_;
    std::string path_;
};

class NullSink final : public OutboundSink {
public:
    void deliver(const Delivery&) override {}
};

}  // namespace expertloop::channel
