#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace expertloop {

using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;
using Date = std::chrono::year_month_day;

// Minutes after local midnight, e.g. 08:00 -> 480.
struct TimeOfDay {
    int minutes = 0;

    static TimeOfDay parse(std::string_view hhmm);
    std::string str() const;
    friend auto operator<=>(const TimeOfDay&, const TimeOfDay&) = default;
};

// Fixed UTC offset deployment timezone ("+05:30"). Clinics the service targets
// do not observe DST, so an offset is sufficient.
class LocalZone {
public:
    LocalZone() = default;
    explicit LocalZone(Seconds utc_offset) : offset_(utc_offset) {}

    static LocalZone parse(std::string_view spec);

    Seconds offset() const { return offset_; }
    std::string str() const;

    Date local_date(Timestamp t) const;
    TimeOfDay local_time(Timestamp t) const;
    Timestamp local_midnight(Date d) const;
    Timestamp at(Date d, TimeOfDay tod) const { return local_midnight(d) + std::chrono::minutes(tod.minutes); }

    // Every instant in (after, until] whose local time of day is one of `times`,
    // ascending.
    std::vector<Timestamp> firings_between(Timestamp after, Timestamp until,
                                           const std::vector<TimeOfDay>& times) const;

    // First instant strictly after `after` matching one of `times`.
    Timestamp next_firing(Timestamp after, const std::vector<TimeOfDay>& times) const;

private:
    Seconds offset_{0};
};

// RFC 3339 with an explicit offset, e.g. 2023-11-30T09:00:00+05:30.
std::string format_rfc3339(Timestamp t, const LocalZone& zone = {});
Timestamp parse_rfc3339(std::string_view text);

std::string format_date(Date d);
Date parse_date(std::string_view text);

// "3h", "90m", "45s", "1h30m" or a bare integer number of seconds.
Seconds parse_duration(std::string_view text);
std::string format_duration(Seconds d);

}  // namespace expertloop
