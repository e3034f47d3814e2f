#pragma once

#include "ktsn/time.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ktsn {

/// One measured message: the talker-predicted transmission time, the shim
/// push time, and the listener arrival time (t_i).
struct RunRecord {
    std::uint64_t seq = 0;
    Instant txtime{0};
    Instant t_send{0};
    Instant t_arrival{0};

    bool operator==(const RunRecord&) const = default;
};

enum class BenchMode { TsnPath, BaselineSleepLoop };

std::string to_string(BenchMode mode);

class StatsError : public std::runtime_error {
public:
    explicit StatsError(const std::string& what) : std::runtime_error(what) {}
};

/// Jitter(i) = t_i - (t_{i-1} + T), signed, one sample per consecutive
/// arrival pair. Requires at least two arrivals.
std::vector<std::int64_t> compute_jitter(std::span<const Instant> arrivals, Duration period);

/// Nearest-rank percentile: sort, then index ceil(p*n) - 1 (zero-based).
/// Points must lie in (0, 1]; samples must be non-empty.
std::vector<std::int64_t> compute_percentiles(std::vector<std::int64_t> samples,
                                              std::span<const double> points);

struct RunStats {
    std::vector<std::int64_t> latencies; // ns; definition depends on mode
    std::vector<std::int64_t> jitters;   // ns, signed
    Duration period;
    BenchMode mode = BenchMode::TsnPath;
    std::size_t payload_size = 0;
    std::uint64_t loss_count = 0;
    std::uint64_t gap_count = 0; // seq gaps that split the jitter sequence
};

/// Builds per-run statistics from records in arrival order.
/// Latency: TsnPath -> t_arrival - txtime; BaselineSleepLoop -> t_arrival -
/// t_send (no txtime exists on that path). Jitter is computed within
/// contiguous-seq segments only; a seq gap starts a new segment. The first
/// `warmup` records by seq are excluded. loss_count = expected - received.
RunStats build_stats(std::span<const RunRecord> records, Duration period, BenchMode mode,
                     std::uint64_t warmup, std::uint64_t expected_count,
                     std::size_t payload_size);

} // namespace ktsn
