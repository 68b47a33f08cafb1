#pragma once

#include <deque>
#include <mutex>

#include "textaug/clock.hpp"

namespace textaug {

// Sliding-window limiter: at most max_per_minute acquisitions in any
// 60-second window. acquire() blocks (via the clock) until a slot opens.
// Safe under concurrent acquire calls.
class RateLimiter {
public:
    RateLimiter(int max_per_minute, Clock& clock);

    void acquire();

private:
    int max_per_minute_;
    Clock& clock_;
    std::mutex mutex_;
    std::deque<std::chrono::milliseconds> issued_;
};

}  // namespace textaug
