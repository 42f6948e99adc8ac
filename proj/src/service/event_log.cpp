#include "expertloop/service/event_log.hpp"

#include <charconv>
#include <cstdio>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "expertloop/core/error.hpp"

namespace expertloop::service {

namespace {

std::uint32_t crc_of(std::string_view bytes) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::string hex8(std::uint32_t v) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
}

}  // namespace

std::string encode_record(const EventRecord& record) {
    nlohmann::json j{{"offset", record.offset},
                     {"at", format_rfc3339(record.event.at)},
                     {"kind", record.event.kind},
                     {"payload", record.event.payload}};
    auto body = j.dump();
    return std::to_string(body.size()) + " " + hex8(crc_of(body)) + " " + body + "\n";
}

EventRecord decode_record(std::string_view line) {
    auto sp1 = line.find(' ');
    if (sp1 == std::string_view::npos) throw Error(Errc::CorruptLog, "missing length");
    auto sp2 = line.find(' ', sp1 + 1);
    if (sp2 == std::string_view::npos || sp2 - sp1 - 1 != 8) throw Error(Errc::CorruptLog, "missing checksum");
    std::size_t len = 0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + sp1, len);
    if (ec != std::errc() || p != line.data() + sp1) throw Error(Errc::CorruptLog, "bad length field");
    auto body = line.substr(sp2 + 1);
    if (body.size() != len) {
        throw Error(Errc::CorruptLog, "length mismatch: header " + std::to_string(len) + ", found " +
                                          std::to_string(body.size()));
    }
    if (hex8(crc_of(body)) != line.substr(sp1 + 1, 8)) throw Error(Errc::CorruptLog, "checksum mismatch");
    try {
        auto j = nlohmann::json::parse(body);
        EventRecord rec;
        rec.offset = j.at("offset").get<std::uint64_t>();
        rec.event.at = parse_rfc3339(j.at("at").get<std::string>());
        rec.event.kind = j.at("kind").get<std::string>();
        rec.event.payload = j.at("payload");
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::CorruptLog, std::string("bad record body: ") + e.what());
    }
}

std::vector<EventRecord> read_log(const std::filesystem::path& path) {
    std::vector<EventRecord> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string::npos) {
            throw Error(Errc::CorruptLog, "truncated record at byte " + std::to_string(pos));
        }
        auto rec = decode_record(std::string_view(content).substr(pos, nl - pos));
        if (rec.offset != out.size()) {
            throw Error(Errc::CorruptLog, "offset " + std::to_string(rec.offset) + " where " +
                                              std::to_string(out.size()) + " was expected");
        }
        out.push_back(std::move(rec));
        pos = nl + 1;
    }
    return out;
}

FileEventLog::FileEventLog(std::filesystem::path path) : path_(std::move(path)) {
    existing_ = read_log(path_);
    next_ = existing_.size();
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw Error(Errc::StorageFailure, "cannot open event log " + path_.string());
}

std::uint64_t FileEventLog::append(const Event& event) {
    std::lock_guard lock(mutex_);
    EventRecord rec{next_, event};
    out_ << encode_record(rec);
    out_.flush();
    if (!out_) throw Error(Errc::StorageFailure, "append to " + path_.string() + " failed");
    return next_++;
}

std::uint64_t FileEventLog::next_offset() const {
    std::lock_guard lock(mutex_);
    return next_;
}

}  // namespace expertloop::service
