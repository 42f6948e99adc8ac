#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "expertloop/core/events.hpp"
#include "expertloop/core/ids.hpp"

namespace expertloop {

// In-memory log, used by tests and by the simulator when no log file is set.
class MemoryEventLog final : public EventSink {
public:
    MemoryEventLog() = default;
    // Starts from records of an earlier run, as a reopened file log would.
    explicit MemoryEventLog(std::vector<EventRecord> records) : records_(std::move(records)) {}

    std::uint64_t append(const Event& event) override;
    std::uint64_t next_offset() const override { return records_.size(); }
    const std::vector<EventRecord>& records() const { return records_; }

private:
    std::vector<EventRecord> records_;
};

// Write side of event sourcing. Modules subscribe an apply function for the
// kinds they own; record() appends durably and then applies, replay() applies
// a stored record without appending.
class Journal {
public:
    using Handler = std::function<void(const EventRecord&)>;

    explicit Journal(EventSink& sink) : sink_(&sink), ids_(sink) {}

    void subscribe(const std::string& kind, Handler handler);

    std::uint64_t record(Event event);
    void replay(const EventRecord& record);

    // True while replay() is dispatching; lets appliers skip work whose
    // effect already happened live (and must not happen twice).
    bool replaying() const { return replaying_; }

    std::string next_id(std::string_view prefix, Timestamp now) { return ids_.next(prefix, now); }
    std::uint64_t next_offset() const { return sink_->next_offset(); }

private:
    void dispatch(const EventRecord& record);

    EventSink* sink_;
    IdSource ids_;
    std::map<std::string, std::vector<Handler>> handlers_;
    bool replaying_ = false;
};

}  // namespace expertloop
