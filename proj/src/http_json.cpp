#include "textaug/http_json.hpp"

#include <cstdlib>

#include <httplib.h>

#include "textaug/errors.hpp"

namespace textaug {

using nlohmann::json;

void ServiceConfig::validate() const {
    if (endpoint_url.empty() && !offline) throw ConfigError("service endpoint_url is not set");
    if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (rate_limit_per_minute <= 0) throw ConfigError("rate_limit must be positive");
    if (backoff_base_ms < 0) throw ConfigError("backoff_base_ms must be >= 0");
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
}

namespace {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint url '" + url + "' lacks a scheme");
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

JsonService::JsonService(ServiceConfig config, Clock& clock)
    : config_(std::move(config)),
      clock_(clock),
      limiter_(config_.rate_limit_per_minute, clock),
      jitter_(Rng(config_.jitter_seed).derive("http-jitter")) {
    config_.validate();
    if (!config_.cache_dir.empty()) cache_.emplace(config_.cache_dir);
}

JsonService::Outcome JsonService::post(const json& payload, const std::string& cache_key) {
    if (cache_ && !cache_key.empty()) {
        if (auto hit = cache_->get(cache_key)) {
            return {json::parse(*hit), 0, true};
        }
    }
    if (config_.offline) {
        throw ServiceError("offline mode: response not in cache for endpoint " +
                           config_.endpoint_url);
    }

    ParsedUrl url = parse_url(config_.endpoint_url);
    httplib::Client client(url.base);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    const std::string body = payload.dump();
    std::string last_error;
    for (int attempt = 1; attempt <= config_.max_retries + 1; ++attempt) {
        limiter_.acquire();
        auto result = client.Post(url.path, headers, body, "application/json");
        if (result) {
            if (result->status == 200) {
                json parsed;
                try {
                    parsed = json::parse(result->body);
                } catch (const json::exception& e) {
                    throw ServiceError(std::string("service returned invalid JSON: ") + e.what());
                }
                if (cache_ && !cache_key.empty()) cache_->put(cache_key, result->body);
                return {std::move(parsed), attempt, false};
            }
            if (result->status == 401 || result->status == 403) {
                throw AuthError("authentication rejected (HTTP " +
                                std::to_string(result->status) + ") by " + config_.endpoint_url);
            }
            if (!transient_status(result->status)) {
                throw ServiceError("HTTP " + std::to_string(result->status) + " from " +
                                   config_.endpoint_url + ": " + result->body);
            }
            last_error = "HTTP " + std::to_string(result->status);
        } else {
            last_error = "connection error: " + httplib::to_string(result.error());
        }
        if (attempt <= config_.max_retries) {
            double scale = 0.5 + [this] {
                std::lock_guard lock(jitter_mutex_);
                return jitter_.next_double();
            }();
            auto delay = static_cast<long long>(
                static_cast<double>(config_.backoff_base_ms) * (1LL << (attempt - 1)) * scale);
            clock_.sleep_for(std::chrono::milliseconds(delay));
        }
    }
    throw ServiceError("exhausted " + std::to_string(config_.max_retries + 1) + " attempts (" +
                       last_error + ") against " + config_.endpoint_url);
}

}  // namespace textaug
