#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <vector>

#include "ctikit/enrich.hpp"

namespace ctikit::testing {

/// Manual clock: sleeping advances time instantly.
class FakeClock final : public enrich::Clock {
public:
    std::chrono::steady_clock::time_point now() override {
        std::lock_guard lock(mutex_);
        return now_;
    }
    void sleep_for(std::chrono::steady_clock::duration d) override {
        std::lock_guard lock(mutex_);
        now_ += d;
        slept_ += d;
    }
    std::chrono::steady_clock::duration slept() {
        std::lock_guard lock(mutex_);
        return slept_;
    }

private:
    std::mutex mutex_;
    std::chrono::steady_clock::time_point now_{};
    std::chrono::steady_clock::duration slept_{};
};

/// Records every request and answers with a scripted handler.
class ScriptedTransport final : public enrich::Transport {
public:
    using Handler = std::function<enrich::HttpResponse(const enrich::HttpRequest&, int call)>;

    ScriptedTransport(Handler handler, enrich::Clock* clock = nullptr) : handler_(std::move(handler)), clock_(clock) {}

    enrich::HttpResponse send(const enrich::HttpRequest& request) override {
        int call;
        {
            std::lock_guard lock(mutex_);
            call = static_cast<int>(requests_.size());
            requests_.push_back(request);
            if (clock_) times_.push_back(clock_->now());
        }
        return handler_(request, call);
    }

    std::size_t count() {
        std::lock_guard lock(mutex_);
        return requests_.size();
    }
    std::vector<enrich::HttpRequest> requests() {
        std::lock_guard lock(mutex_);
        return requests_;
    }
    std::vector<std::chrono::steady_clock::time_point> times() {
        std::lock_guard lock(mutex_);
        return times_;
    }

private:
    Handler handler_;
    enrich::Clock* clock_;
    std::mutex mutex_;
    std::vector<enrich::HttpRequest> requests_;
    std::vector<std::chrono::steady_clock::time_point> times_;
};

/// Largest number of events inside any half-open window [t, t + width).
inline std::size_t max_in_window(std::vector<std::chrono::steady_clock::time_point> times,
                                 std::chrono::steady_clock::duration width) {
    std::sort(times.begin(), times.end());
    std::size_t best = 0;
    std::size_t lo = 0;
    for (std::size_t hi = 0; hi < times.size(); ++hi) {
        while (times[hi] - times[lo] >= width) ++lo;
        best = std::max(best, hi - lo + 1);
    }
    return best;
}

inline enrich::Credentials dummy_credentials() {
    return enrich::Credentials{"vt-test-key", "otx-test-key", "https://misp.invalid", "misp-test-key"};
}

}  // namespace ctikit::testing
