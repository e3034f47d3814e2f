#pragma once

#include <cstdint>
#include <compare>
#include <limits>
#include <stdexcept>

namespace ktsn {

/// Thrown when Instant/Duration arithmetic would wrap around.
class TimeOverflow : public std::runtime_error {
public:
    TimeOverflow() : std::runtime_error("time arithmetic overflow") {}
};

/// Nanosecond span. Zero is allowed.
struct Duration {
    std::uint64_t ns = 0;

    static constexpr Duration nanos(std::uint64_t n) { return Duration{n}; }
    static constexpr Duration micros(std::uint64_t u) { return Duration{u * 1000ull}; }
    static constexpr Duration millis(std::uint64_t m) { return Duration{m * 1000000ull}; }
    static constexpr Duration seconds(std::uint64_t s) { return Duration{s * 1000000000ull}; }

    constexpr auto operator<=>(const Duration&) const = default;
};

/// Nanoseconds since an arbitrary per-run epoch.
struct Instant {
    std::uint64_t ns = 0;

    constexpr auto operator<=>(const Instant&) const = default;
};

inline Instant operator+(Instant t, Duration d) {
    if (t.ns > std::numeric_limits<std::uint64_t>::max() - d.ns) throw TimeOverflow{};
    return Instant{t.ns + d.ns};
}

inline Instant operator-(Instant t, Duration d) {
    if (t.ns < d.ns) throw TimeOverflow{};
    return Instant{t.ns - d.ns};
}

/// Elapsed time from `earlier` to `later`; requires later >= earlier.
inline Duration operator-(Instant later, Instant earlier) {
    if (later.ns < earlier.ns) throw TimeOverflow{};
    return Duration{later.ns - earlier.ns};
}

inline Duration operator+(Duration a, Duration b) {
    if (a.ns > std::numeric_limits<std::uint64_t>::max() - b.ns) throw TimeOverflow{};
    return Duration{a.ns + b.ns};
}

inline Duration operator*(Duration d, std::uint64_t k) {
    if (k != 0 && d.ns > std::numeric_limits<std::uint64_t>::max() / k) throw TimeOverflow{};
    return Duration{d.ns * k};
}

} // namespace ktsn
