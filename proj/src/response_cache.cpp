#include "textaug/response_cache.hpp"

#include <fstream>
#include <sstream>

#include "textaug/errors.hpp"
#include "textaug/rng.hpp"

namespace textaug {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (dir_.empty()) throw ConfigError("response cache needs a directory");
    std::filesystem::create_directories(dir_);
}

std::string ResponseCache::key_for(const std::string& model,
                                   const std::string& canonical_request) {
    // two independent fnv streams give a 128-bit key
    std::string payload = model;
    payload.push_back('\x1f');
    payload += canonical_request;
    std::uint64_t a = fnv1a64(payload);
    std::string salted = "\x02" + payload;
    std::uint64_t b = fnv1a64(salted);
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(a),
                  static_cast<unsigned long long>(b));
    return buf;
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    return dir_ / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto path = path_for(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void ResponseCache::put(const std::string& key, const std::string& value) {
    std::lock_guard lock(mutex_);
    auto path = path_for(key);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ServiceError("cannot write cache file '" + tmp.string() + "'");
        out << value;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace textaug
