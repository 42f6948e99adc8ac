#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/channel/sink.hpp"
#include "expertloop/channel/wire.hpp"
#include "expertloop/core/journal.hpp"
#include "expertloop/core/time.hpp"
#include "expertloop/kb/pipeline.hpp"
#include "expertloop/service/config.hpp"
#include "expertloop/service/service.hpp"

namespace expertloop::fakes {

inline std::filesystem::path data_dir() { return EXPERTLOOP_DATA_DIR; }

inline service::ServiceConfig bundled_config() {
    auto config = service::load_config(data_dir() / "config.json");
    config.log_path.clear();
    config.review_dir.clear();
    config.audio_dir.clear();
    config.outbound_url.clear();
    return config;
}

inline Timestamp at(std::string_view rfc3339) { return parse_rfc3339(rfc3339); }

// A fully wired in-memory service over the bundled configuration.
struct TestWorld {
    service::ServiceConfig config;
    std::shared_ptr<MemoryEventLog> log;
    std::shared_ptr<channel::CapturingSink> sink = std::make_shared<channel::CapturingSink>();
    std::shared_ptr<kb::MemoryReviewSink> reviews = std::make_shared<kb::MemoryReviewSink>();
    std::shared_ptr<llm::CompletionProvider> llm;  // empty: configured mock
    std::unique_ptr<service::Service> service;
    int next_inbound = 0;

    explicit TestWorld(service::ServiceConfig c = bundled_config()) : config(std::move(c)) {}

    void build(std::vector<EventRecord> records, Timestamp now) {
        log = std::make_shared<MemoryEventLog>(records);
        service::ServiceOverrides o;
        o.log = log;
        o.replay = std::move(records);
        o.outbound = sink;
        o.review_sink = reviews;
        o.llm = llm;
        o.sleeper = [](Seconds) {};
        service = std::make_unique<service::Service>(config, std::move(o));
        service->start(now);
    }

    void start(Timestamp now) { build({}, now); }

    void restart(Timestamp now) {
        auto records = log->records();
        service.reset();
        build(std::move(records), now);
    }

    // Registers a patient (and attendant when given) with dr-rao and pc-meena.
    std::vector<UserId> onboard(const std::string& patient_phone, Timestamp now, std::string language = "EN",
                                std::string surgery_date = "2023-11-22", std::string attendant_phone = "") {
        nlohmann::json form{{"patient_phone", patient_phone},
                            {"patient_language", language},
                            {"attendant_language", "EN"},
                            {"operating_doctor_id", "dr-rao"},
                            {"operating_coordinator_id", "pc-meena"},
                            {"surgery_date", surgery_date},
                            {"demographics", {{"age", "64"}, {"gender", "F"}, {"education", "Graduate"}}}};
        if (!attendant_phone.empty()) form["attendant_phone"] = attendant_phone;
        return service->onboard(onboarding::parse_form(form), now).created;
    }

    channel::InboundMessage inbound(const std::string& from, Timestamp now) {
        channel::InboundMessage m;
        m.sender = from;
        m.message_id = "in-" + std::to_string(++next_inbound);
        m.timestamp = now;
        return m;
    }

    nlohmann::json text(const std::string& from, const std::string& body, Timestamp now) {
        auto m = inbound(from, now);
        m.text = body;
        return service->handle_inbound(m, now);
    }

    nlohmann::json press(const std::string& from, const std::string& label, Timestamp now,
                         std::optional<MessageId> context = std::nullopt) {
        auto m = inbound(from, now);
        m.kind = channel::InboundKind::ButtonPress;
        m.button_label = label;
        m.context_message_id = std::move(context);
        return service->handle_inbound(m, now);
    }

    // Outbound payloads to an address, optionally of one wire kind.
    std::vector<nlohmann::json> sent_to(const std::string& address, std::string_view kind = {}) const {
        std::vector<nlohmann::json> out;
        for (const auto& d : sink->deliveries()) {
            if (d.payload.value("recipient", "") != address) continue;
            if (!kind.empty() && d.payload.value("kind", "") != kind) continue;
            out.push_back(d.payload);
        }
        return out;
    }

    std::vector<EventRecord> events(std::string_view kind) const {
        std::vector<EventRecord> out;
        for (const auto& r : log->records()) {
            if (r.event.kind == kind) out.push_back(r);
        }
        return out;
    }
};

}  // namespace expertloop::fakes
