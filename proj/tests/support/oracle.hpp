// Test-only oracles, independent of the library's scheduling and codec
// paths: a brute-force gate timeline, a release-rule replay over it, and a
// second, simpler frame parser.
#pragma once

#include "ktsn/tas.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace ktsn::testing {

// Absolute open intervals [start, end) for one class, unrolled over
// `cycles` cycles starting at base_time.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>>
unrolled_open_intervals(const GateControlList& gcl, std::uint8_t cls, std::uint64_t cycles) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (std::uint64_t k = 0; k < cycles; ++k) {
        const std::uint64_t cycle_start = gcl.base_time.ns + k * gcl.cycle.ns;
        for (const GclSlot& s : gcl.slots) {
            if ((s.open_classes >> cls) & 1u)
                out.emplace_back(cycle_start + s.offset.ns, cycle_start + s.offset.ns + s.length.ns);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline bool gate_open_brute(const GateControlList& gcl, std::uint8_t cls, std::uint64_t t,
                            std::uint64_t cycles = 16) {
    for (auto [a, b] : unrolled_open_intervals(gcl, cls, cycles))
        if (t >= a && t < b) return true;
    return false;
}

// Linear scan for the first open instant >= t. The horizon must cover t.
inline std::uint64_t next_open_brute(const GateControlList& gcl, std::uint8_t cls,
                                     std::uint64_t t, std::uint64_t cycles = 16) {
    for (auto [a, b] : unrolled_open_intervals(gcl, cls, cycles)) {
        if (t < a) return a;
        if (t < b) return t;
    }
    return ~0ull; // class never open within horizon
}

struct OraclePacket {
    std::uint64_t seq;
    std::uint64_t txtime; // 0 = none
    std::uint8_t cls;
};

struct OracleRelease {
    std::uint64_t seq;
    std::uint64_t release;
    std::uint8_t cls;

    bool operator==(const OracleRelease&) const = default;
};

// Replays the release rule directly over the unrolled timeline for a batch
// of packets all present at `now0`:
//   release = max(eff_txtime, first open instant >= eff_txtime)
// ordered by (release, class, seq).
inline std::vector<OracleRelease> replay_offline(const GateControlList& gcl,
                                                 std::vector<OraclePacket> packets,
                                                 std::uint64_t now0, std::uint64_t cycles = 64) {
    std::vector<OracleRelease> out;
    for (const OraclePacket& p : packets) {
        std::uint64_t eff = std::max(p.txtime, now0);
        if (p.txtime == 0) eff = now0;
        out.push_back({p.seq, next_open_brute(gcl, p.cls, eff, cycles), p.cls});
    }
    std::sort(out.begin(), out.end(), [](const OracleRelease& a, const OracleRelease& b) {
        if (a.release != b.release) return a.release < b.release;
        if (a.cls != b.cls) return a.cls < b.cls;
        return a.seq < b.seq;
    });
    return out;
}

// Random GCL: 1..max_slots slots tiling the cycle, slot boundaries on a
// 10 us grid, random open masks. Guarantees at least one slot per class id
// below num_classes is NOT guaranteed; pick packet classes with class_opens.
inline GateControlList random_gcl(std::mt19937_64& rng, std::size_t max_slots = 4,
                                  std::uint8_t num_classes = 4) {
    GateControlList gcl;
    gcl.num_classes = num_classes;
    std::uniform_int_distribution<std::uint64_t> cyc(5, 100);
    gcl.cycle = Duration::micros(cyc(rng) * 10);
    std::uniform_int_distribution<std::size_t> nslots(1, max_slots);
    const std::size_t n = nslots(rng);

    // cut points on the 10 us grid
    std::vector<std::uint64_t> cuts{0, gcl.cycle.ns};
    std::uniform_int_distribution<std::uint64_t> cut(1, gcl.cycle.ns / 10000 - 1);
    while (cuts.size() < n + 1) cuts.push_back(cut(rng) * 10000);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::uniform_int_distribution<std::uint32_t> mask(0, (1u << num_classes) - 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        gcl.slots.push_back(GclSlot{Duration{cuts[i]}, Duration{cuts[i + 1] - cuts[i]},
                                    static_cast<std::uint8_t>(mask(rng))});
    }
    // make sure class 0 opens somewhere so workloads always have a usable class
    if (!std::any_of(gcl.slots.begin(), gcl.slots.end(),
                     [](const GclSlot& s) { return s.open_classes & 1u; }))
        gcl.slots[0].open_classes |= 1u;
    return gcl;
}

inline bool class_opens(const GateControlList& gcl, std::uint8_t cls) {
    return std::any_of(gcl.slots.begin(), gcl.slots.end(),
                       [&](const GclSlot& s) { return (s.open_classes >> cls) & 1u; });
}

inline std::vector<OraclePacket> random_workload(std::mt19937_64& rng,
                                                 const GateControlList& gcl,
                                                 std::size_t max_packets = 32) {
    std::vector<std::uint8_t> usable;
    for (std::uint8_t c = 0; c < gcl.num_classes; ++c)
        if (class_opens(gcl, c)) usable.push_back(c);

    std::uniform_int_distribution<std::size_t> np(1, max_packets);
    std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
    std::uniform_int_distribution<std::uint64_t> tx(0, gcl.cycle.ns * 5);
    std::vector<OraclePacket> packets;
    const std::size_t n = np(rng);
    for (std::size_t i = 0; i < n; ++i)
        packets.push_back({i, tx(rng), usable[pick(rng)]});
    return packets;
}

// ---- independent reference frame parser -------------------------------

struct RefParsed {
    std::array<std::uint8_t, 6> eth_dst{}, eth_src{};
    std::uint16_t ethertype = 0;
    std::array<std::uint8_t, 4> ip_src{}, ip_dst{};
    std::uint8_t ttl = 0, proto = 0;
    std::uint16_t ip_total = 0, ident = 0, frag = 0;
    std::uint16_t sport = 0, dport = 0, udp_len = 0, udp_csum = 0;
    std::vector<std::uint8_t> payload;
    bool ip_checksum_ok = false;
};

// Deliberately naive second parser; asserts nothing, just reads fields.
inline RefParsed reference_parse(const std::vector<std::uint8_t>& b) {
    RefParsed r;
    auto rd16 = [&](std::size_t i) {
        return static_cast<std::uint16_t>(b.at(i) * 256 + b.at(i + 1));
    };
    for (int i = 0; i < 6; ++i) r.eth_dst[i] = b.at(i);
    for (int i = 0; i < 6; ++i) r.eth_src[i] = b.at(6 + i);
    r.ethertype = rd16(12);
    r.ip_total = rd16(16);
    r.ident = rd16(18);
    r.frag = rd16(20);
    r.ttl = b.at(22);
    r.proto = b.at(23);
    for (int i = 0; i < 4; ++i) r.ip_src[i] = b.at(26 + i);
    for (int i = 0; i < 4; ++i) r.ip_dst[i] = b.at(30 + i);
    r.sport = rd16(34);
    r.dport = rd16(36);
    r.udp_len = rd16(38);
    r.udp_csum = rd16(40);
    r.payload.assign(b.begin() + 42, b.end());

    // ones'-complement sum of the header, written out longhand
    std::uint32_t sum = 0;
    for (std::size_t i = 14; i < 34; i += 2) sum += rd16(i);
    sum = (sum & 0xffff) + (sum >> 16);
    sum = (sum & 0xffff) + (sum >> 16);
    r.ip_checksum_ok = (sum == 0xffff);
    return r;
}

} // namespace ktsn::testing
