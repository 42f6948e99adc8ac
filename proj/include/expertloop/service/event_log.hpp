#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "expertloop/core/events.hpp"

namespace expertloop::service {

// One record per line: "<byte length> <crc32 hex> <json>\n", where the JSON
// is {"offset","at","kind","payload"} and the length and checksum cover the
// JSON bytes only.
std::string encode_record(const EventRecord& record);
// Throws CorruptLog on a malformed line, length or checksum mismatch.
EventRecord decode_record(std::string_view line);

// Reads a log file in full. A missing file is an empty log. Throws CorruptLog
// for a truncated or damaged record and for non-dense offsets.
std::vector<EventRecord> read_log(const std::filesystem::path& path);

// Append-only file log. Each append is flushed before it returns.
class FileEventLog final : public EventSink {
public:
    // Validates the existing content; the records are available from
    // existing() for replay.
    explicit FileEventLog(std::filesystem::path path);

    std::uint64_t append(const Event& event) override;
    std::uint64_t next_offset() const override;

    const std::vector<EventRecord>& existing() const { return existing_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::vector<EventRecord> existing_;
    std::ofstream out_;
    std::uint64_t next_ = 0;
    mutable std::mutex mutex_;
};

}  // namespace expertloop::service
