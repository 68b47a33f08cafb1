#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

namespace textaug {

// Content-addressed on-disk store for service responses. Keys hash the
// model name and the canonical request payload, so a warm cache doubles
// as an offline fixture snapshot.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    static std::string key_for(const std::string& model, const std::string& canonical_request);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& value);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path path_for(const std::string& key) const;

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

}  // namespace textaug
