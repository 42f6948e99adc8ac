#include "expertloop/core/journal.hpp"

namespace expertloop {

std::uint64_t MemoryEventLog::append(const Event& event) {
    records_.push_back({records_.size(), event});
    return records_.back().offset;
}

void Journal::subscribe(const std::string& kind, Handler handler) { handlers_[kind].push_back(std::move(handler)); }

std::uint64_t Journal::record(Event event) {
    EventRecord rec{0, std::move(event)};
    rec.offset = sink_->append(rec.event);
    dispatch(rec);
    return rec.offset;
}

void Journal::replay(const EventRecord& record) {
    replaying_ = true;
    try {
        dispatch(record);
    } catch (...) {
        replaying_ = false;
        throw;
    }
    replaying_ = false;
}

void Journal::dispatch(const EventRecord& record) {
    auto it = handlers_.find(record.event.kind);
    if (it == handlers_.end()) return;
    for (const auto& h : it->second) h(record);
}

}  // namespace expertloop
