#include "ktsn/tas.hpp"

#include <algorithm>
#include <limits>

namespace ktsn {

void gcl_validate(const GateControlList& gcl) {
    if (gcl.cycle.ns == 0) throw GclError(GclErrc::ZeroCycle, "cycle duration is zero");
    if (gcl.slots.empty()) throw GclError(GclErrc::NoSlots, "gate control list has no slots");
    if (gcl.num_classes == 0 || gcl.num_classes > 8)
        throw GclError(GclErrc::BadClassId, "num_classes must be in 1..8");

    for (std::size_t i = 1; i < gcl.slots.size(); ++i) {
        if (gcl.slots[i].offset.ns < gcl.slots[i - 1].offset.ns)
            throw GclError(GclErrc::Unsorted,
                           "slot " + std::to_string(i) + " offset precedes previous slot");
    }

    const std::uint8_t valid_mask = static_cast<std::uint8_t>((1u << gcl.num_classes) - 1);
    std::uint64_t expect_offset = 0;
    for (std::size_t i = 0; i < gcl.slots.size(); ++i) {
        const GclSlot& s = gcl.slots[i];
        if (s.offset.ns < expect_offset)
            throw GclError(GclErrc::Overlap,
                           "slot " + std::to_string(i) + " overlaps previous slot");
        if (s.offset.ns > expect_offset)
            throw GclError(GclErrc::Gap, "gap before slot " + std::to_string(i));
        if (s.open_classes & ~valid_mask)
            throw GclError(GclErrc::BadClassId,
                           "slot " + std::to_string(i) + " opens an unconfigured class");
        expect_offset = s.offset.ns + s.length.ns;
    }
    if (expect_offset != gcl.cycle.ns)
        throw GclError(GclErrc::Gap, "slots do not tile the full cycle");
}

namespace {

// Index of the slot containing phase offset `p` (0 <= p < cycle).
std::size_t slot_at(const GateControlList& gcl, std::uint64_t p) {
    for (std::size_t i = 0; i < gcl.slots.size(); ++i) {
        const GclSlot& s = gcl.slots[i];
        if (p >= s.offset.ns && p < s.offset.ns + s.length.ns) return i;
    }
    return gcl.slots.size() - 1; // unreachable for a validated GCL
}

} // namespace

bool gate_open(const GateControlList& gcl, std::uint8_t class_id, Instant t) {
    if (t < gcl.base_time) throw std::invalid_argument("gate_open: t precedes GCL base_time");
    const std::uint64_t p = (t.ns - gcl.base_time.ns) % gcl.cycle.ns;
    const GclSlot& s = gcl.slots[slot_at(gcl, p)];
    return (s.open_classes >> class_id) & 1u;
}

Instant next_gate_open(const GateControlList& gcl, std::uint8_t class_id, Instant t) {
    bool class_opens = false;
    for (const GclSlot& s : gcl.slots)
        if ((s.open_classes >> class_id) & 1u) class_opens = true;
    if (!class_opens) throw ClassNeverOpen(class_id);

    if (t < gcl.base_time) t = gcl.base_time;
    if (gate_open(gcl, class_id, t)) return t;

    // Earliest opening slot start at or after t, within this cycle or the next.
    const std::uint64_t rel = t.ns - gcl.base_time.ns;
    const std::uint64_t cycle_idx = rel / gcl.cycle.ns;
    Instant best{std::numeric_limits<std::uint64_t>::max()};
    for (std::uint64_t k = cycle_idx; k <= cycle_idx + 1; ++k) {
        for (const GclSlot& s : gcl.slots) {
            if (!((s.open_classes >> class_id) & 1u)) continue;
            Instant start = gcl.base_time + gcl.cycle * k + s.offset;
            if (start >= t && start < best) best = start;
        }
    }
    return best;
}

TasScheduler::TasScheduler(SchedulerConfig cfg) : cfg_(std::move(cfg)) {
    gcl_validate(cfg_.gcl);
    queues_.resize(cfg_.gcl.num_classes);
}

SubmitResult TasScheduler::submit(PacketDescriptor desc, Instant now) {
    if (desc.traffic_class >= cfg_.gcl.num_classes) throw UnknownClass(desc.traffic_class);
    ++stats_.submitted;
    const bool has_txtime = desc.txtime.ns != 0;
    if (has_txtime && desc.txtime < now && cfg_.past_txtime_policy == PastTxtimePolicy::Drop) {
        ++stats_.dropped_late;
        return SubmitResult::Dropped;
    }
    const Instant effective = has_txtime ? std::max(desc.txtime, now) : now;
    const Instant release =
        std::max(effective, next_gate_open(cfg_.gcl, desc.traffic_class, effective));
    auto key = std::make_pair(release, desc.seq);
    queues_[desc.traffic_class].emplace(key, std::move(desc));
    return SubmitResult::Queued;
}

std::optional<TasScheduler::Release> TasScheduler::next_release() const {
    std::optional<Release> best;
    for (std::uint8_t cls = 0; cls < queues_.size(); ++cls) {
        const auto& q = queues_[cls];
        if (q.empty()) continue;
        const auto& [key, desc] = *q.begin();
        const auto& [at, seq] = key;
        if (!best || at < best->at ||
            (at == best->at && (cls < best->class_id ||
                                (cls == best->class_id && seq < best->seq)))) {
            best = Release{at, cls, at, seq};
        }
    }
    return best;
}

PacketDescriptor TasScheduler::take(const Release& rel) {
    auto& q = queues_[rel.class_id];
    auto it = q.find({rel.key_time, rel.seq});
    PacketDescriptor desc = std::move(it->second);
    q.erase(it);
    return desc;
}

bool TasScheduler::idle() const {
    return std::all_of(queues_.begin(), queues_.end(), [](const auto& q) { return q.empty(); });
}

namespace {

TxRecord release_one(TasScheduler& sched, Clock& clock, EgressSink& egress,
                     const TasScheduler::Release& rel) {
    PacketDescriptor desc = sched.take(rel);
    EncodeOptions opts;
    opts.ttl = sched.config().ttl;
    opts.udp_checksum = sched.config().udp_checksum;
    opts.ip_ident = static_cast<std::uint16_t>(desc.seq & 0xffff);
    Frame frame = encode_udp_frame(desc.flow, desc.payload, opts);

    TxRecord rec;
    rec.seq = desc.seq;
    rec.class_id = desc.traffic_class;
    rec.frame_len = static_cast<std::uint32_t>(frame.size());
    rec.release_time = clock.now();
    while (!egress(frame, rec)) {
        sched.count_egress_stall();
        rec.release_time = clock.now();
    }
    sched.count_release();
    return rec;
}

} // namespace

std::vector<TxRecord> drain_until(TasScheduler& sched, Clock& clock, EgressSink egress,
                                  Instant limit) {
    std::vector<TxRecord> records;
    while (auto rel = sched.next_release()) {
        if (rel->at > limit) break;
        clock.sleep_until(rel->at);
        records.push_back(release_one(sched, clock, egress, *rel));
    }
    return records;
}

std::vector<TxRecord> drain_release_loop(TasScheduler& sched, Clock& clock, EgressSink egress) {
    return drain_until(sched, clock, egress,
                       Instant{std::numeric_limits<std::uint64_t>::max()});
}

std::vector<TxRecord> run_release_loop(TasScheduler& sched, Clock& clock,
                                       std::vector<DescriptorRing*> rings, EgressSink egress,
                                       const std::atomic<bool>& stop,
                                       const ReleaseLoopOptions& opts) {
    std::vector<TxRecord> records;
    auto poll_rings = [&] {
        Instant now = clock.now();
        for (DescriptorRing* ring : rings)
            while (auto desc = ring->pop()) sched.submit(std::move(*desc), now);
    };

    while (true) {
        poll_rings();
        auto rel = sched.next_release();
        if (!rel) {
            if (stop.load(std::memory_order_acquire)) {
                poll_rings();
                if (sched.idle()) break;
                continue;
            }
            clock.sleep_coarse(opts.idle_sleep);
            continue;
        }
        Instant now = clock.now();
        if (rel->at.ns > now.ns + opts.poll_chunk.ns) {
            // Wait only one poll chunk so a newly arrived descriptor with an
            // earlier release can preempt the pending one. Coarse on purpose:
            // only the final approach to the release instant needs precision.
            // The last nap is shortened to keep a full chunk of margin before
            // the release, so a nanosleep overshoot cannot swallow it.
            const std::uint64_t to_rel = rel->at.ns - now.ns;
            clock.sleep_coarse(
                Duration{std::min<std::uint64_t>(opts.poll_chunk.ns, to_rel - opts.poll_chunk.ns)});
            continue;
        }
        clock.sleep_until(rel->at);
        poll_rings();
        rel = sched.next_release();
        if (!rel || rel->at > clock.now()) continue;
        records.push_back(release_one(sched, clock, egress, *rel));
    }
    return records;
}

} // namespace ktsn
