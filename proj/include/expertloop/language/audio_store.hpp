#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "expertloop/core/time.hpp"

namespace expertloop::language {

std::string sha256_hex(std::string_view data);

// Content-addressed audio artifacts. The handle is the SHA-256 of the bytes,
// so storing the same clip twice yields one artifact. With an empty directory
// the store keeps everything in memory.
class AudioStore {
public:
    explicit AudioStore(std::filesystem::path dir = {}, Seconds retention = std::chrono::hours(24 * 30));

    std::string put(const std::string& bytes, Timestamp now);
    std::optional<std::string> get(const std::string& handle) const;
    bool contains(const std::string& handle) const;

    // Removes artifacts stored more than `retention` before now; returns count.
    std::size_t purge(Timestamp now);

    std::size_t size() const;

private:
    std::filesystem::path path_for(const std::string& handle) const;

    std::filesystem::path dir_;
    Seconds retention_;
    mutable std::mutex mutex_;
    std::map<std::string, Timestamp> stored_at_;
    std::map<std::string, std::string> memory_;
};

}  // namespace expertloop::language
