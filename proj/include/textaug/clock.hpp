#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>

namespace textaug {

// Time source behind the retry/rate-limit stack. Tests swap in a
// VirtualClock so no wall time passes.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::milliseconds now() = 0;
    virtual void sleep_for(std::chrono::milliseconds duration) = 0;
};

class SystemClock final : public Clock {
public:
    std::chrono::milliseconds now() override;
    void sleep_for(std::chrono::milliseconds duration) override;
};

// Advances instantly on sleep_for; records total time slept.
class VirtualClock final : public Clock {
public:
    std::chrono::milliseconds now() override;
    void sleep_for(std::chrono::milliseconds duration) override;

    std::chrono::milliseconds total_slept() const;

private:
    mutable std::mutex mutex_;
    std::chrono::milliseconds now_{0};
    std::chrono::milliseconds slept_{0};
};

}  // namespace textaug
