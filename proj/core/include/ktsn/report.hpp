#pragma once

#include "ktsn/stats.hpp"

#include <string>
#include <vector>

namespace ktsn {

struct RunData {
    BenchMode mode = BenchMode::TsnPath;
    std::size_t payload_size = 0;
    Duration period;
    std::uint64_t warmup = 0;
    std::uint64_t expected_count = 0;
    std::vector<RunRecord> records; // arrival order
};

/// Writes, per run, run_<mode>_<payload>.csv (seq,txtime_ns,t_send_ns,
/// t_arrival_ns,latency_ns,jitter_ns) and cdf_<mode>_<payload>.csv
/// (latency_ns,cumulative_fraction), plus one summary.csv across all runs
/// (mode,payload,n,median_ns,p90_ns,p99_ns,min_ns,max_ns,loss). Output is
/// deterministic: identical inputs produce byte-identical files.
void emit_report(const std::vector<RunData>& runs, const std::string& out_dir);

/// Reads back a run_<mode>_<payload>.csv written by emit_report.
RunData load_run_csv(const std::string& path);

} // namespace ktsn
