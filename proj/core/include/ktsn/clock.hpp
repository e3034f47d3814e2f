#pragma once

#include "ktsn/time.hpp"

#include <mutex>
#include <set>
#include <stdexcept>

namespace ktsn {

class EmptyEventSet : public std::runtime_error {
public:
    EmptyEventSet() : std::runtime_error("no pending wakeups") {}
};

/// Monotonic time source. Two implementations: the OS monotonic clock and a
/// deterministic simulated clock driven by explicit advances.
class Clock {
public:
    virtual ~Clock() = default;

    virtual Instant now() = 0;

    /// Blocks (or, simulated, advances) until at least `deadline`.
    /// Returns the time observed on wake, always >= deadline and >= now().
    virtual Instant sleep_until(Instant deadline) = 0;

    /// Coarse wait with no precision guarantee: never busy-polls, may
    /// overshoot. For periodic polling where burning the CPU would starve
    /// other threads.
    virtual void sleep_coarse(Duration d) { sleep_until(now() + d); }
};

/// Epoch choice for the real clock: PerRun zeroes the clock at construction
/// (single-process pipelines, keeps instants small); Machine uses the raw
/// monotonic clock so cooperating processes on one host agree on instants.
enum class ClockEpoch { PerRun, Machine };

/// Real monotonic clock. sleep_until does a coarse OS sleep until
/// deadline - spin_window, then busy-polls the remainder.
class RealClock final : public Clock {
public:
    explicit RealClock(Duration spin_window = Duration::micros(100),
                       ClockEpoch epoch = ClockEpoch::PerRun);

    Instant now() override;
    Instant sleep_until(Instant deadline) override;
    void sleep_coarse(Duration d) override;

    Duration spin_window() const { return spin_window_; }

private:
    std::uint64_t epoch_ns_;
    Duration spin_window_;
};

/// Event-driven simulated clock. Time only moves via sleep_until or
/// advance_to_next_event; reads never change state.
class SimClock final : public Clock {
public:
    explicit SimClock(Instant start = Instant{0}) : current_(start) {}

    Instant now() override {
        std::lock_guard lk(mu_);
        return current_;
    }

    /// Advances current time to the deadline (no backwards travel).
    Instant sleep_until(Instant deadline) override {
        std::lock_guard lk(mu_);
        if (deadline > current_) current_ = deadline;
        return current_;
    }

    void register_wakeup(Instant at) {
        std::lock_guard lk(mu_);
        wakeups_.insert(at);
    }

    bool has_pending_wakeups() const {
        std::lock_guard lk(mu_);
        return !wakeups_.empty();
    }

    /// Jumps to the earliest pending wakeup and consumes it.
    Instant advance_to_next_event() {
        std::lock_guard lk(mu_);
        if (wakeups_.empty()) throw EmptyEventSet{};
        auto it = wakeups_.begin();
        if (*it > current_) current_ = *it;
        wakeups_.erase(it);
        return current_;
    }

private:
    mutable std::mutex mu_;
    Instant current_;
    std::multiset<Instant> wakeups_;
};

} // namespace ktsn
