#include "textaug/clock.hpp"

#include <thread>

namespace textaug {

std::chrono::milliseconds SystemClock::now() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now().time_since_epoch());
}

void SystemClock::sleep_for(std::chrono::milliseconds duration) {
    std::this_thread::sleep_for(duration);
}

std::chrono::milliseconds VirtualClock::now() {
    std::lock_guard lock(mutex_);
    return now_;
}

void VirtualClock::sleep_for(std::chrono::milliseconds duration) {
    std::lock_guard lock(mutex_);
    now_ += duration;
    slept_ += duration;
}

std::chrono::milliseconds VirtualClock::total_slept() const {
    std::lock_guard lock(mutex_);
    return slept_;
}

}  // namespace textaug
