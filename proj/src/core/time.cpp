#include "expertloop/core/time.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "expertloop/core/error.hpp"

namespace expertloop {

namespace {

using std::chrono::days;
using std::chrono::floor;
using std::chrono::hours;
using std::chrono::minutes;
using std::chrono::sys_days;

int parse_int(std::string_view s, std::string_view what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(Errc::InvalidArgument, "bad " + std::string(what) + ": '" + std::string(s) + "'");
    }
    return value;
}

Seconds parse_offset(std::string_view s) {
    if (s == "Z" || s == "z") return Seconds{0};
    if (s.size() != 6 || (s[0] != '+' && s[0] != '-') || s[3] != ':') {
        throw Error(Errc::InvalidArgument, "bad UTC offset: '" + std::string(s) + "'");
    }
    int h = parse_int(s.substr(1, 2), "offset hours");
    int m = parse_int(s.substr(4, 2), "offset minutes");
    Seconds off = hours(h) + minutes(m);
    return s[0] == '-' ? -off : off;
}

std::string offset_str(Seconds off) {
    if (off.count() == 0) return "Z";
    char sign = off.count() < 0 ? '-' : '+';
    auto abs = off.count() < 0 ? -off : off;
    auto h = std::chrono::duration_cast<hours>(abs).count();
    auto m = std::chrono::duration_cast<minutes>(abs).count() % 60;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%02lld:%02lld", sign, static_cast<long long>(h),
                  static_cast<long long>(m));
    return buf;
}

}  // namespace

TimeOfDay TimeOfDay::parse(std::string_view hhmm) {
    auto colon = hhmm.find(':');
    if (colon == std::string_view::npos) {
        throw Error(Errc::InvalidArgument, "time of day must be HH:MM: '" + std::string(hhmm) + "'");
    }
    int h = parse_int(hhmm.substr(0, colon), "hour");
    int m = parse_int(hhmm.substr(colon + 1), "minute");
    if (h < 0 || h > 23 || m < 0 || m > 59) {
        throw Error(Errc::InvalidArgument, "time of day out of range: '" + std::string(hhmm) + "'");
    }
    return TimeOfDay{h * 60 + m};
}

std::string TimeOfDay::str() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
    return buf;
}

LocalZone LocalZone::parse(std::string_view spec) {
    if (spec == "UTC" || spec.empty()) return LocalZone{};
    return LocalZone{parse_offset(spec)};
}

std::string LocalZone::str() const { return offset_.count() == 0 ? "+00:00" : offset_str(offset_); }

Date LocalZone::local_date(Timestamp t) const { return Date{floor<days>(t + offset_)}; }

TimeOfDay LocalZone::local_time(Timestamp t) const {
    auto local = t + offset_;
    auto since_midnight = local - floor<days>(local);
    return TimeOfDay{static_cast<int>(std::chrono::duration_cast<minutes>(since_midnight).count())};
}

Timestamp LocalZone::local_midnight(Date d) const {
    return Timestamp{sys_days{d}} - offset_;
}

std::vector<Timestamp> LocalZone::firings_between(Timestamp after, Timestamp until,
                                                  const std::vector<TimeOfDay>& times) const {
    std::vector<Timestamp> out;
    if (until <= after || times.empty()) return out;
    auto sorted = times;
    std::sort(sorted.begin(), sorted.end());
    for (sys_days day = sys_days{local_date(after)}; local_midnight(Date{day}) <= until; day += days(1)) {
        for (const auto& tod : sorted) {
            Timestamp t = at(Date{day}, tod);
            if (t > after && t <= until) out.push_back(t);
        }
    }
    return out;
}

Timestamp LocalZone::next_firing(Timestamp after, const std::vector<TimeOfDay>& times) const {
    if (times.empty()) return Timestamp::max();
    auto sorted = times;
    std::sort(sorted.begin(), sorted.end());
    for (sys_days day = sys_days{local_date(after)};; day += days(1)) {
        for (const auto& tod : sorted) {
            Timestamp t = at(Date{day}, tod);
            if (t > after) return t;
        }
    }
}

std::string format_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw Error(Errc::InvalidArgument, "date must be YYYY-MM-DD: '" + std::string(text) + "'");
    }
    Date d{std::chrono::year{parse_int(text.substr(0, 4), "year")},
           std::chrono::month{static_cast<unsigned>(parse_int(text.substr(5, 2), "month"))},
           std::chrono::day{static_cast<unsigned>(parse_int(text.substr(8, 2), "day"))}};
    if (!d.ok()) throw Error(Errc::InvalidArgument, "invalid date: '" + std::string(text) + "'");
    return d;
}

std::string format_rfc3339(Timestamp t, const LocalZone& zone) {
    auto local = t + zone.offset();
    auto day = floor<days>(local);
    Date d{day};
    auto secs = (local - day).count();
    char buf[48];
    std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lld%s", format_date(d).c_str(),
                  static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                  static_cast<long long>(secs % 60), offset_str(zone.offset()).c_str());
    return buf;
}

Timestamp parse_rfc3339(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SS(Z|+HH:MM)
    if (text.size() < 20 || (text[10] != 'T' && text[10] != 't' && text[10] != ' ') || text[13] != ':' ||
        text[16] != ':') {
        throw Error(Errc::InvalidArgument, "timestamp must be RFC 3339: '" + std::string(text) + "'");
    }
    Date d = parse_date(text.substr(0, 10));
    int h = parse_int(text.substr(11, 2), "hour");
    int m = parse_int(text.substr(14, 2), "minute");
    int s = parse_int(text.substr(17, 2), "second");
    std::size_t pos = 19;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    }
    Seconds off = parse_offset(text.substr(pos));
    return Timestamp{sys_days{d}} + hours(h) + minutes(m) + Seconds(s) - off;
}

Seconds parse_duration(std::string_view text) {
    if (text.empty()) throw Error(Errc::InvalidArgument, "empty duration");
    if (std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return Seconds(parse_int(text, "duration"));
    }
    Seconds total{0};
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t j = i;
        while (j < text.size() && text[j] >= '0' && text[j] <= '9') ++j;
        if (j == i || j == text.size()) {
            throw Error(Errc::InvalidArgument, "bad duration: '" + std::string(text) + "'");
        }
        long long n = parse_int(text.substr(i, j - i), "duration");
        switch (text[j]) {
            case 'd': total += days(n); break;
            case 'h': total += hours(n); break;
            case 'm': total += minutes(n); break;
            case 's': total += Seconds(n); break;
            default: throw Error(Errc::InvalidArgument, "bad duration unit: '" + std::string(text) + "'");
        }
        i = j + 1;
    }
    return total;
}

std::string format_duration(Seconds d) {
    auto s = d.count();
    std::string out;
    if (s >= 3600) out += std::to_string(s / 3600) + "h";
    if (s % 3600 >= 60) out += std::to_string(s % 3600 / 60) + "m";
    if (s % 60 != 0 || out.empty()) out += std::to_string(s % 60) + "s";
    return out;
}

}  // namespace expertloop
