#include "expertloop/core/ids.hpp"

namespace expertloop {

namespace {
constexpr char kCrockford[] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";
}

std::string encode_ulid(std::uint64_t millis, std::uint64_t seq_hi, std::uint64_t seq_lo) {
    std::string out(26, '0');
    // 48-bit time -> 10 chars (50 bits, top 2 zero)
    for (int i = 9; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kCrockford[millis & 31u];
        millis >>= 5;
    }
    // 80-bit sequence: 16 bits from seq_hi, 64 bits from seq_lo -> 16 chars
    for (int i = 25; i >= 10; --i) {
        out[static_cast<std::size_t>(i)] = kCrockford[seq_lo & 31u];
        seq_lo = (seq_lo >> 5) | ((seq_hi & 31u) << 59);
        seq_hi >>= 5;
    }
    return out;
}

std::string IdSource::next(std::string_view prefix, Timestamp now) {
    std::uint64_t offset = log_->next_offset();
    if (offset != last_offset_) {
        last_offset_ = offset;
        counter_ = 0;
    }
    auto millis = static_cast<std::uint64_t>(now.time_since_epoch().count()) * 1000u;
    std::string id(prefix);
    id += '-';
    id += encode_ulid(millis & 0xFFFFFFFFFFFFull, offset >> 48, (offset << 16) | (counter_++ & 0xFFFFu));
    return id;
}

}  // namespace expertloop
