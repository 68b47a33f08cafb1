#include "textaug/rate_limiter.hpp"

#include "textaug/errors.hpp"

namespace textaug {

namespace {
constexpr std::chrono::milliseconds kWindow{60'000};
}

RateLimiter::RateLimiter(int max_per_minute, Clock& clock)
    : max_per_minute_(max_per_minute), clock_(clock) {
    if (max_per_minute_ <= 0) throw ConfigError("rate limit must be positive");
}

void RateLimiter::acquire() {
    std::unique_lock lock(mutex_);
    for (;;) {
        auto now = clock_.now();
        while (!issued_.empty() && now - issued_.front() >= kWindow) issued_.pop_front();
        if (issued_.size() < static_cast<std::size_t>(max_per_minute_)) {
            issued_.push_back(now);
            return;
        }
        auto wait = issued_.front() + kWindow - now;
        lock.unlock();
        clock_.sleep_for(wait);
        lock.lock();
    }
}

}  // namespace textaug
