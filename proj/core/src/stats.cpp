#include "ktsn/stats.hpp"

#include <algorithm>
#include <cmath>

namespace ktsn {

std::string to_string(BenchMode mode) {
    return mode == BenchMode::TsnPath ? "tsn" : "baseline";
}

std::vector<std::int64_t> compute_jitter(std::span<const Instant> arrivals, Duration period) {
    if (arrivals.size() < 2)
        throw StatsError("jitter needs at least two arrivals");
    std::vector<std::int64_t> out;
    out.reserve(arrivals.size() - 1);
    for (std::size_t i = 1; i < arrivals.size(); ++i) {
        out.push_back(static_cast<std::int64_t>(arrivals[i].ns) -
                      static_cast<std::int64_t>(arrivals[i - 1].ns) -
                      static_cast<std::int64_t>(period.ns));
    }
    return out;
}

std::vector<std::int64_t> compute_percentiles(std::vector<std::int64_t> samples,
                                              std::span<const double> points) {
    if (samples.empty()) throw StatsError("percentiles of an empty sample set");
    std::sort(samples.begin(), samples.end());
    std::vector<std::int64_t> out;
    out.reserve(points.size());
    for (double p : points) {
        if (!(p > 0.0 && p <= 1.0)) throw StatsError("percentile point outside (0, 1]");
        std::size_t rank = static_cast<std::size_t>(
            std::ceil(p * static_cast<double>(samples.size())));
        if (rank == 0) rank = 1;
        out.push_back(samples[rank - 1]);
    }
    return out;
}

RunStats build_stats(std::span<const RunRecord> records, Duration period, BenchMode mode,
                     std::uint64_t warmup, std::uint64_t expected_count,
                     std::size_t payload_size) {
    RunStats stats;
    stats.period = period;
    stats.mode = mode;
    stats.payload_size = payload_size;
    stats.loss_count = expected_count > records.size()
                           ? expected_count - records.size()
                           : 0;

    const RunRecord* prev = nullptr;
    for (const RunRecord& r : records) {
        if (r.seq < warmup) continue;
        std::int64_t latency =
            mode == BenchMode::TsnPath
                ? static_cast<std::int64_t>(r.t_arrival.ns) - static_cast<std::int64_t>(r.txtime.ns)
                : static_cast<std::int64_t>(r.t_arrival.ns) - static_cast<std::int64_t>(r.t_send.ns);
        stats.latencies.push_back(latency);

        if (prev) {
            if (r.seq == prev->seq + 1) {
                stats.jitters.push_back(static_cast<std::int64_t>(r.t_arrival.ns) -
                                        static_cast<std::int64_t>(prev->t_arrival.ns) -
                                        static_cast<std::int64_t>(period.ns));
            } else {
                ++stats.gap_count; // loss splits the jitter sequence
            }
        }
        prev = &r;
    }
    return stats;
}

} // namespace ktsn
