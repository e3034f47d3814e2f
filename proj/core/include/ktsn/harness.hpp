#pragma once

#include "ktsn/report.hpp"
#include "ktsn/shim.hpp"
#include "ktsn/tas.hpp"
#include "ktsn/vswitch.hpp"

#include <mutex>
#include <optional>

namespace ktsn {

struct BenchConfig {
    BenchMode mode = BenchMode::TsnPath;
    std::size_t payload_size = 256;
    Duration period = Duration::millis(1);
    std::uint64_t count = 10000;
    std::uint64_t warmup = 100;    // leading messages excluded from statistics
    Duration lead = Duration::micros(500); // tsn talker pushes this far before txtime
};

class BenchConfigError : public std::runtime_error {
public:
    explicit BenchConfigError(const std::string& what) : std::runtime_error(what) {}
};

void validate_bench_config(const BenchConfig& cfg);

// Measurement payload: seq, txtime, t_send as little-endian u64 triplet,
// zero-padded to the configured payload size (minimum 24 bytes).
inline constexpr std::size_t kBenchPayloadMin = 24;

std::vector<std::uint8_t> encode_bench_payload(std::uint64_t seq, Instant txtime, Instant t_send,
                                               std::size_t payload_size);

struct BenchSample {
    std::uint64_t seq;
    Instant txtime;
    Instant t_send;
};

std::optional<BenchSample> decode_bench_payload(std::span<const std::uint8_t> payload);

/// Collects arrivals; safe to feed from a transport receive thread.
class BenchListener {
public:
    void on_frame(const Frame& frame, Instant now);
    std::size_t received() const;
    std::vector<RunRecord> take_records();

private:
    mutable std::mutex mu_;
    std::vector<RunRecord> records_;
};

struct TalkerLog {
    std::uint64_t attempted = 0;
    std::uint64_t sent = 0;
    std::uint64_t wouldblock = 0;
    Instant base{0};
};

/// Message i carries txtime = base + i*period and is pushed `lead` before it.
TalkerLog talker_run_tsn(TsnSocket& sock, Clock& clock, const BenchConfig& cfg, Instant base);

/// Kernel-path analog: send one message, then plain-sleep one period. Uses
/// the OS sleep (not the precise hybrid wait) on purpose; no txtime exists on
/// this path.
TalkerLog talker_run_baseline(TsnSocket& sock, Clock& clock, const BenchConfig& cfg);

struct PipelineResult {
    RunData run;
    std::vector<TxRecord> tx_records;
    TalkerLog talker;
    SchedulerStats sched_stats;
};

/// Full single-host loopback pipeline over real UDP sockets:
/// talker -> ring -> TAS daemon -> vswitch -> VXLAN/UDP loopback -> vswitch
/// -> listener (TsnPath), or talker -> baseline overlay send -> loopback ->
/// vswitch -> listener (BaselineSleepLoop).
PipelineResult run_loopback_benchmark(const BenchConfig& cfg, const SchedulerConfig& sched_cfg,
                                      RealClock& clock);

/// Deterministic end-to-end fixture: the same pipeline on the simulated
/// clock with an in-memory tunnel of fixed hop delay. Produces exactly zero
/// jitter and constant latency.
PipelineResult run_simulated_pipeline(const BenchConfig& cfg, const SchedulerConfig& sched_cfg,
                                      Duration hop_delay);

/// An all-open single-slot schedule, the configuration benchmarks use when
/// gating is not under test.
SchedulerConfig all_open_config(Duration cycle = Duration::millis(1), std::uint8_t num_classes = 1);

/// Fixed talker/listener addressing used by the harness.
FlowTuple bench_flow();
VxlanParams bench_overlay(std::uint16_t vxlan_port);

} // namespace ktsn
