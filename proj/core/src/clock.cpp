#include "ktsn/clock.hpp"

#include <ctime>

namespace ktsn {

namespace {

std::uint64_t monotonic_ns() {
    timespec ts{};
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return static_cast<std::uint64_t>(ts.tv_sec) * 1000000000ull +
           static_cast<std::uint64_t>(ts.tv_nsec);
}

} // namespace

RealClock::RealClock(Duration spin_window, ClockEpoch epoch)
    : epoch_ns_(epoch == ClockEpoch::PerRun ? monotonic_ns() : 0), spin_window_(spin_window) {}

Instant RealClock::now() {
    return Instant{monotonic_ns() - epoch_ns_};
}

Instant RealClock::sleep_until(Instant deadline) {
    Instant t = now();
    // Coarse sleep up to the spin window, then busy-poll the last stretch.
    if (deadline.ns > spin_window_.ns) {
        Instant coarse{deadline.ns - spin_window_.ns};
        while (t < coarse) {
            std::uint64_t remaining = coarse.ns - t.ns;
            timespec req{static_cast<time_t>(remaining / 1000000000ull),
                         static_cast<long>(remaining % 1000000000ull)};
            nanosleep(&req, nullptr);
            t = now();
        }
    }
    while (t < deadline) t = now();
    return t;
}

void RealClock::sleep_coarse(Duration d) {
    timespec req{static_cast<time_t>(d.ns / 1000000000ull),
                 static_cast<long>(d.ns % 1000000000ull)};
    nanosleep(&req, nullptr);
}

} // namespace ktsn
