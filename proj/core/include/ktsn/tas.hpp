#pragma once

#include "ktsn/clock.hpp"
#include "ktsn/frame_codec.hpp"
#include "ktsn/ring.hpp"
#include "ktsn/time.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ktsn {

/// One entry of the cyclic gate schedule. open_classes is a bitmask over
/// traffic class ids (bit i = class i open).
struct GclSlot {
    Duration offset;
    Duration length;
    std::uint8_t open_classes = 0;
};

/// Cyclic 802.1Qbv gate schedule. Slots must tile [0, cycle) exactly.
struct GateControlList {
    Duration cycle;
    Instant base_time{0};
    std::vector<GclSlot> slots;
    std::uint8_t num_classes = 1;
};

enum class GclErrc { ZeroCycle, Unsorted, Overlap, Gap, BadClassId, NoSlots };

class GclError : public std::runtime_error {
public:
    GclError(GclErrc errc, const std::string& what) : std::runtime_error(what), errc_(errc) {}
    GclErrc errc() const { return errc_; }

private:
    GclErrc errc_;
};

class ClassNeverOpen : public std::runtime_error {
public:
    explicit ClassNeverOpen(std::uint8_t cls)
        : std::runtime_error("traffic class " + std::to_string(cls) + " opens in no slot") {}
};

class UnknownClass : public std::runtime_error {
public:
    explicit UnknownClass(std::uint8_t cls)
        : std::runtime_error("traffic class " + std::to_string(cls) + " not configured") {}
};

/// Checks all GateControlList invariants; throws GclError naming the first
/// violated rule.
void gcl_validate(const GateControlList& gcl);

/// True iff class_id's gate is open at t. Requires t >= base_time.
bool gate_open(const GateControlList& gcl, std::uint8_t class_id, Instant t);

/// Smallest t' >= t with gate_open(gcl, class_id, t'). Throws ClassNeverOpen
/// when the class appears in no slot.
Instant next_gate_open(const GateControlList& gcl, std::uint8_t class_id, Instant t);

enum class PastTxtimePolicy { Drop, SendImmediately };

struct SchedulerConfig {
    GateControlList gcl;
    PastTxtimePolicy past_txtime_policy = PastTxtimePolicy::Drop;
    Duration release_tolerance = Duration::micros(500);
    Duration spin_window = Duration::micros(100);
    bool udp_checksum = true;
    std::uint8_t ttl = kDefaultTtl;
};

/// Emitted for every transmitted packet; feeds the benchmark statistics.
struct TxRecord {
    std::uint64_t seq = 0;
    Instant release_time{0};
    std::uint32_t frame_len = 0;
    std::uint8_t class_id = 0;

    bool operator==(const TxRecord&) const = default;
};

enum class SubmitResult { Queued, Dropped };

struct SchedulerStats {
    std::uint64_t submitted = 0;
    std::uint64_t released = 0;
    std::uint64_t dropped_late = 0;
    std::uint64_t egress_stalls = 0;
};

/// Userspace Time-Aware Shaper core: per-class queues ordered by
/// (effective txtime, seq) and the release rule
///   release(d) = max(txtime, next_gate_open(class, txtime)).
/// Single-threaded by contract; descriptor ingestion and release run on the
/// owning context.
class TasScheduler {
public:
    explicit TasScheduler(SchedulerConfig cfg);

    SubmitResult submit(PacketDescriptor desc, Instant now);

    struct Release {
        Instant at;
        std::uint8_t class_id;
        // queue key of the winning descriptor (its computed release time)
        Instant key_time;
        std::uint64_t seq;
    };

    /// The earliest pending release over all class queues, or nullopt when
    /// idle. Ties broken by class id ascending, then seq.
    std::optional<Release> next_release() const;

    /// Removes and returns the descriptor named by a Release.
    PacketDescriptor take(const Release& rel);

    bool idle() const;
    const SchedulerConfig& config() const { return cfg_; }
    const SchedulerStats& stats() const { return stats_; }
    void count_egress_stall() { ++stats_.egress_stalls; }
    void count_release() { ++stats_.released; }

private:
    SchedulerConfig cfg_;
    SchedulerStats stats_;
    // per class: (release_time, seq) -> descriptor, so packets whose release
    // instants coincide leave in seq order regardless of their txtimes
    std::vector<std::map<std::pair<Instant, std::uint64_t>, PacketDescriptor>> queues_;
};

/// Egress sink for released frames. Returns false on backpressure; the loop
/// counts the stall and retries without reordering.
using EgressSink = std::function<bool(const Frame&, const TxRecord&)>;

/// Releases queued descriptors in release order while the next computed
/// release is <= limit, encoding each as a UDP frame and pushing it to
/// `egress`. Deterministic under SimClock: release times equal the computed
/// release instants exactly.
std::vector<TxRecord> drain_until(TasScheduler& sched, Clock& clock, EgressSink egress,
                                  Instant limit);

/// Drains every queued descriptor.
std::vector<TxRecord> drain_release_loop(TasScheduler& sched, Clock& clock, EgressSink egress);

/// Online daemon loop: polls client rings round-robin before each sleep so a
/// newly arrived descriptor with an earlier release wakes the loop early.
/// Runs until *stop is set and all queues and rings are empty.
struct ReleaseLoopOptions {
    Duration poll_chunk = Duration::micros(200);
    Duration idle_sleep = Duration::micros(50);
};

std::vector<TxRecord> run_release_loop(TasScheduler& sched, Clock& clock,
                                       std::vector<DescriptorRing*> rings, EgressSink egress,
                                       const std::atomic<bool>& stop,
                                       const ReleaseLoopOptions& opts = {});

} // namespace ktsn
