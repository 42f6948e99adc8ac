#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "expertloop/core/events.hpp"
#include "expertloop/core/time.hpp"

namespace expertloop {

// 26-character Crockford base32 ULID layout: 48 bits of milliseconds followed
// by 80 bits of sequence.
std::string encode_ulid(std::uint64_t millis, std::uint64_t seq_hi, std::uint64_t seq_lo);

// Deterministic, time-sortable identifiers. The sequence part is derived from
// the log's next offset plus a per-offset counter, so ids never repeat across
// a restart and identical runs produce identical ids.
class IdSource {
public:
    explicit IdSource(const EventSink& log) : log_(&log) {}

    std::string next(std::string_view prefix, Timestamp now);

private:
    const EventSink* log_;
    std::uint64_t last_offset_ = ~std::uint64_t{0};
    std::uint64_t counter_ = 0;
};

}  // namespace expertloop
