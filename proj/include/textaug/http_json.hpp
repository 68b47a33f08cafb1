#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "textaug/clock.hpp"
#include "textaug/rate_limiter.hpp"
#include "textaug/response_cache.hpp"
#include "textaug/rng.hpp"

namespace textaug {

// Connection settings shared by every remote JSON service (chat
// completion, fill-mask, translation).
struct ServiceConfig {
    std::string endpoint_url;
    std::string api_key_env;  // env var holding the bearer token; never logged
    std::string model = "gpt-3.5-turbo";
    double temperature = 1.0;
    int timeout_ms = 30'000;
    int max_retries = 3;  // retries after the first attempt
    int backoff_base_ms = 200;
    int rate_limit_per_minute = 60;
    std::string cache_dir;
    bool offline = false;  // serve from cache only, never touch the network
    std::uint64_t jitter_seed = 0;

    void validate() const;
};

// JSON POST client with sliding-window rate limiting, exponential backoff
// with jitter on transient failures (429/5xx/connection errors), and a
// content-addressed response cache. 401/403 abort immediately.
class JsonService {
public:
    JsonService(ServiceConfig config, Clock& clock);

    struct Outcome {
        nlohmann::json body;
        int attempts = 0;  // network round trips; 0 on a cache hit
        bool from_cache = false;
    };

    // cache_key may be empty to bypass the cache for this call.
    Outcome post(const nlohmann::json& payload, const std::string& cache_key);

    const ServiceConfig& config() const { return config_; }

private:
    ServiceConfig config_;
    Clock& clock_;
    RateLimiter limiter_;
    std::optional<ResponseCache> cache_;
    std::mutex jitter_mutex_;
    Rng jitter_;
};

}  // namespace textaug
