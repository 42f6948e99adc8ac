#include "expertloop/language/audio_store.hpp"

#include <fstream>
#include <sstream>

#include <openssl/sha.h>

#include "expertloop/core/error.hpp"

namespace expertloop::language {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * SHA256_DIGEST_LENGTH);
    for (unsigned char b : digest) {
        out += kHex[b >> 4];
        out += kHex[b & 0xF];
    }
    return out;
}

AudioStore::AudioStore(std::filesystem::path dir, Seconds retention) : dir_(std::move(dir)), retention_(retention) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::filesystem::path AudioStore::path_for(const std::string& handle) const { return dir_ / (handle + ".audio"); }

std::string AudioStore::put(const std::string& bytes, Timestamp now) {
    auto handle = sha256_hex(bytes);
    std::lock_guard lock(mutex_);
    if (stored_at_.count(handle)) {
        stored_at_[handle] = std::max(stored_at_[handle], now);
        return handle;
    }
    if (dir_.empty()) {
        memory_[handle] = bytes;
    } else {
        std::ofstream out(path_for(handle), std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(Errc::StorageFailure, "cannot write audio artifact " + handle);
    }
    stored_at_[handle] = now;
    return handle;
}

std::optional<std::string> AudioStore::get(const std::string& handle) const {
    std::lock_guard lock(mutex_);
    if (!stored_at_.count(handle)) return std::nullopt;
    if (dir_.empty()) return memory_.at(handle);
    std::ifstream in(path_for(handle), std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool AudioStore::contains(const std::string& handle) const {
    std::lock_guard lock(mutex_);
    return stored_at_.count(handle) > 0;
}

std::size_t AudioStore::purge(Timestamp now) {
    std::lock_guard lock(mutex_);
    std::size_t removed = 0;
    for (auto it = stored_at_.begin(); it != stored_at_.end();) {
        if (now - it->second > retention_) {
            if (dir_.empty()) memory_.erase(it->first);
            else std::filesystem::remove(path_for(it->first));
            it = stored_at_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

std::size_t AudioStore::size() const {
    std::lock_guard lock(mutex_);
    return stored_at_.size();
}

}  // namespace expertloop::language
