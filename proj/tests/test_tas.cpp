#include <doctest.h>

#include "ktsn/tas.hpp"
#include "support/oracle.hpp"

#include <atomic>
#include <map>
#include <random>
#include <thread>

using namespace ktsn;
using namespace ktsn::testing;

namespace {

// cycle 1 ms: class 0 open in [0, 500 us), class 1 open in [500 us, 1 ms)
GateControlList two_slot_gcl() {
    GateControlList gcl;
    gcl.cycle = Duration::millis(1);
    gcl.num_classes = 2;
    gcl.slots = {GclSlot{Duration{0}, Duration::micros(500), 0b01},
                 GclSlot{Duration::micros(500), Duration::micros(500), 0b10}};
    return gcl;
}

PacketDescriptor desc_for(std::uint64_t seq, std::uint8_t cls, std::uint64_t txtime_ns,
                          std::size_t payload_len = 32) {
    PacketDescriptor d;
    d.seq = seq;
    d.traffic_class = cls;
    d.txtime = Instant{txtime_ns};
    d.flow.src_mac = {{0x02, 0, 0, 0, 0, 1}};
    d.flow.dst_mac = {{0x02, 0, 0, 0, 0, 2}};
    d.flow.src_ip = {{10, 0, 0, 1}};
    d.flow.dst_ip = {{10, 0, 0, 2}};
    d.flow.src_port = 7001;
    d.flow.dst_port = 7002;
    d.payload.assign(payload_len, static_cast<std::uint8_t>(seq));
    return d;
}

EgressSink null_sink() {
    return [](const Frame&, const TxRecord&) { return true; };
}

GclErrc validate_errc(const GateControlList& gcl) {
    try {
        gcl_validate(gcl);
    } catch (const GclError& e) {
        return e.errc();
    }
    throw std::logic_error("expected validation failure");
}

} // namespace

TEST_SUITE("tas-scheduler") {

TEST_CASE("the textbook two-slot schedule validates") {
    CHECK_NOTHROW(gcl_validate(two_slot_gcl()));
}

TEST_CASE("overlapping slots are rejected") {
    auto gcl = two_slot_gcl();
    gcl.slots[0].length = Duration::micros(600);
    CHECK(validate_errc(gcl) == GclErrc::Overlap);
}

TEST_CASE("a gap between slots is rejected") {
    auto gcl = two_slot_gcl();
    gcl.slots[0].length = Duration::micros(400);
    CHECK(validate_errc(gcl) == GclErrc::Gap);
}

TEST_CASE("zero cycle, unsorted slots, bad class ids") {
    auto gcl = two_slot_gcl();
    gcl.cycle = Duration{0};
    CHECK(validate_errc(gcl) == GclErrc::ZeroCycle);

    gcl = two_slot_gcl();
    std::swap(gcl.slots[0], gcl.slots[1]);
    CHECK(validate_errc(gcl) == GclErrc::Unsorted);

    gcl = two_slot_gcl();
    gcl.slots[1].open_classes = 0b100; // class 2, but num_classes = 2
    CHECK(validate_errc(gcl) == GclErrc::BadClassId);

    gcl = two_slot_gcl();
    gcl.slots.back().length = Duration::micros(400);
    CHECK(validate_errc(gcl) == GclErrc::Gap); // slots must tile the cycle
}

TEST_CASE("gate_open inside and outside the class slot") {
    auto gcl = two_slot_gcl();
    CHECK(gate_open(gcl, 0, Instant{250'000}));
    CHECK_FALSE(gate_open(gcl, 0, Instant{750'000}));
    CHECK(gate_open(gcl, 1, Instant{750'000}));
}

TEST_CASE("gate_open wraps across cycles, checked against the unrolled timeline") {
    auto gcl = two_slot_gcl();
    CHECK(gate_open(gcl, 0, Instant{1'250'000}));
    std::mt19937_64 rng(31);
    for (int i = 0; i < 2000; ++i) {
        std::uint64_t t = rng() % (gcl.cycle.ns * 10);
        for (std::uint8_t cls = 0; cls < 2; ++cls)
            CHECK(gate_open(gcl, cls, Instant{t}) == gate_open_brute(gcl, cls, t));
    }
}

TEST_CASE("gate_open before base_time is an error") {
    auto gcl = two_slot_gcl();
    gcl.base_time = Instant{1'000'000};
    CHECK_THROWS_AS(gate_open(gcl, 0, Instant{500'000}), std::invalid_argument);
}

TEST_CASE("next_gate_open: first opening, idempotence when open, wrap") {
    auto gcl = two_slot_gcl();
    CHECK(next_gate_open(gcl, 1, Instant{0}) == Instant{500'000});
    CHECK(next_gate_open(gcl, 0, Instant{250'000}) == Instant{250'000});
    CHECK(next_gate_open(gcl, 1, Instant{1'000'001}) == Instant{1'500'000});
}

TEST_CASE("next_gate_open agrees with the brute-force oracle") {
    std::mt19937_64 rng(37);
    for (int c = 0; c < 50; ++c) {
        GateControlList gcl = random_gcl(rng);
        for (int i = 0; i < 100; ++i) {
            std::uint64_t t = rng() % (gcl.cycle.ns * 8);
            for (std::uint8_t cls = 0; cls < gcl.num_classes; ++cls) {
                if (!class_opens(gcl, cls)) {
                    CHECK_THROWS_AS(next_gate_open(gcl, cls, Instant{t}), ClassNeverOpen);
                    continue;
                }
                CHECK(next_gate_open(gcl, cls, Instant{t}).ns == next_open_brute(gcl, cls, t));
            }
        }
    }
}

TEST_CASE("submit: future txtime queues, past txtime drops under Drop policy") {
    SchedulerConfig cfg;
    cfg.gcl = two_slot_gcl();
    TasScheduler sched(cfg);
    const Instant now{100'000};

    CHECK(sched.submit(desc_for(0, 0, now.ns + 1'000'000), now) == SubmitResult::Queued);
    CHECK(sched.submit(desc_for(1, 0, now.ns - 1), now) == SubmitResult::Dropped);
    CHECK(sched.stats().dropped_late == 1);
    CHECK(sched.submit(desc_for(2, 0, 0), now) == SubmitResult::Queued); // unset means now
    CHECK_THROWS_AS(sched.submit(desc_for(3, 5, 0), now), UnknownClass);
}

TEST_CASE("SendImmediately queues a late packet at now") {
    SchedulerConfig cfg;
    cfg.gcl = two_slot_gcl();
    cfg.past_txtime_policy = PastTxtimePolicy::SendImmediately;
    TasScheduler sched(cfg);
    CHECK(sched.submit(desc_for(0, 0, 50'000), Instant{100'000}) == SubmitResult::Queued);
    auto rel = sched.next_release();
    REQUIRE(rel.has_value());
    CHECK(rel->at == Instant{100'000}); // gate open, released at now
}

TEST_CASE("next_release: txtime dominates when the gate is open") {
    SchedulerConfig cfg;
    cfg.gcl = two_slot_gcl();
    TasScheduler sched(cfg);
    sched.submit(desc_for(0, 0, 250'000), Instant{0});
    auto rel = sched.next_release();
    REQUIRE(rel.has_value());
    CHECK(rel->at == Instant{250'000});
}

TEST_CASE("next_release: closed gate defers to the next opening") {
    SchedulerConfig cfg;
    cfg.gcl = two_slot_gcl();
    TasScheduler sched(cfg);
    sched.submit(desc_for(0, 1, 250'000), Instant{0});
    auto rel = sched.next_release();
    REQUIRE(rel.has_value());
    CHECK(rel->at == Instant{500'000}); // buffered until the slot opens
}

TEST_CASE("equal txtimes release in seq order") {
    SchedulerConfig cfg;
    cfg.gcl = two_slot_gcl();
    TasScheduler sched(cfg);
    sched.submit(desc_for(6, 0, 100'000), Instant{0});
    sched.submit(desc_for(5, 0, 100'000), Instant{0});
    auto rel = sched.next_release();
    REQUIRE(rel.has_value());
    CHECK(rel->seq == 5);
}

TEST_CASE("drain: three class-1 packets all release at the slot opening in seq order") {
    SchedulerConfig cfg;
    cfg.gcl = two_slot_gcl();
    TasScheduler sched(cfg);
    SimClock clock;
    sched.submit(desc_for(0, 1, 100'000), clock.now());
    sched.submit(desc_for(1, 1, 200'000), clock.now());
    sched.submit(desc_for(2, 1, 300'000), clock.now());

    auto records = drain_release_loop(sched, clock, null_sink());
    REQUIRE(records.size() == 3);
    for (std::uint64_t i = 0; i < 3; ++i) {
        CHECK(records[i].seq == i);
        CHECK(records[i].release_time == Instant{500'000});
    }
}

TEST_CASE("drain: simulated release time is exact") {
    SchedulerConfig cfg;
    cfg.gcl = two_slot_gcl();
    TasScheduler sched(cfg);
    SimClock clock;
    sched.submit(desc_for(0, 0, 250'000), clock.now());
    auto records = drain_release_loop(sched, clock, null_sink());
    REQUIRE(records.size() == 1);
    CHECK(records[0].release_time == Instant{250'000});
}

TEST_CASE("egress backpressure is counted and never reorders") {
    SchedulerConfig cfg;
    cfg.gcl = two_slot_gcl();
    TasScheduler sched(cfg);
    SimClock clock;
    for (std::uint64_t i = 0; i < 3; ++i) sched.submit(desc_for(i, 0, 100'000 + i), clock.now());

    int failures_left = 4;
    std::vector<std::uint64_t> seqs;
    EgressSink flaky = [&](const Frame&, const TxRecord& rec) {
        if (failures_left > 0) {
            --failures_left;
            return false;
        }
        seqs.push_back(rec.seq);
        return true;
    };
    drain_release_loop(sched, clock, flaky);
    CHECK(seqs == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(sched.stats().egress_stalls == 4);
}

TEST_CASE("oracle equivalence on randomized GCLs and workloads") {
    std::mt19937_64 rng(41);
    for (int c = 0; c < 200; ++c) {
        GateControlList gcl = random_gcl(rng);
        auto packets = random_workload(rng, gcl);

        SchedulerConfig cfg;
        cfg.gcl = gcl;
        TasScheduler sched(cfg);
        SimClock clock;
        for (const auto& p : packets) sched.submit(desc_for(p.seq, p.cls, p.txtime), Instant{0});
        auto records = drain_release_loop(sched, clock, null_sink());

        auto expected = replay_offline(gcl, packets, 0);
        REQUIRE(records.size() == expected.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            CHECK(records[i].seq == expected[i].seq);
            CHECK(records[i].release_time.ns == expected[i].release);
            CHECK(records[i].class_id == expected[i].cls);
        }
    }
}

TEST_CASE("properties: gate discipline, txtime respect, per-class order") {
    std::mt19937_64 rng(43);
    for (int c = 0; c < 200; ++c) {
        GateControlList gcl = random_gcl(rng);
        auto packets = random_workload(rng, gcl);

        SchedulerConfig cfg;
        cfg.gcl = gcl;
        TasScheduler sched(cfg);
        SimClock clock;
        for (const auto& p : packets) sched.submit(desc_for(p.seq, p.cls, p.txtime), Instant{0});
        auto records = drain_release_loop(sched, clock, null_sink());
        REQUIRE(records.size() == packets.size());

        // per class: (release, seq) strictly increases, i.e. releases never go
        // backwards and coinciding releases leave in seq order
        std::map<std::uint8_t, std::pair<std::uint64_t, std::uint64_t>> last;
        for (const TxRecord& r : records) {
            CHECK(gate_open_brute(gcl, r.class_id, r.release_time.ns, 64));
            const auto& p = packets[r.seq];
            CHECK(r.release_time.ns >= p.txtime);
            auto it = last.find(r.class_id);
            if (it != last.end()) {
                CHECK(std::make_pair(r.release_time.ns, r.seq) > it->second);
            }
            last[r.class_id] = {r.release_time.ns, r.seq};
        }
    }
}

TEST_CASE("priority isolation: class-B load leaves class-A records unchanged") {
    std::mt19937_64 rng(47);
    for (int c = 0; c < 50; ++c) {
        GateControlList gcl = two_slot_gcl();
        std::vector<OraclePacket> class_a;
        std::uniform_int_distribution<std::uint64_t> tx(0, gcl.cycle.ns * 4);
        for (std::uint64_t i = 0; i < 10; ++i) class_a.push_back({i, tx(rng), 0});

        auto run = [&](bool with_background) {
            SchedulerConfig cfg;
            cfg.gcl = gcl;
            TasScheduler sched(cfg);
            SimClock clock;
            for (const auto& p : class_a) sched.submit(desc_for(p.seq, 0, p.txtime), Instant{0});
            if (with_background) {
                for (std::uint64_t i = 0; i < 40; ++i)
                    sched.submit(desc_for(1000 + i, 1, tx(rng)), Instant{0});
            }
            auto records = drain_release_loop(sched, clock, null_sink());
            std::vector<TxRecord> a_only;
            for (const TxRecord& r : records)
                if (r.class_id == 0) a_only.push_back(r);
            return a_only;
        };

        CHECK(run(false) == run(true));
    }
}

TEST_CASE("work conservation: an open-gate due packet releases before time advances") {
    SchedulerConfig cfg;
    cfg.gcl = two_slot_gcl();
    TasScheduler sched(cfg);
    SimClock clock;
    clock.sleep_until(Instant{250'000}); // class 0 gate open now
    sched.submit(desc_for(0, 0, 100'000), Instant{100'000});
    auto rel = sched.next_release();
    REQUIRE(rel.has_value());
    CHECK(rel->at <= clock.now());
    auto records = drain_release_loop(sched, clock, null_sink());
    CHECK(records[0].release_time == clock.now()); // released without advancing
}

TEST_CASE("online loop on the real clock releases ring arrivals in order") {
    SchedulerConfig cfg;
    cfg.gcl.cycle = Duration::millis(1);
    cfg.gcl.num_classes = 1;
    cfg.gcl.slots = {GclSlot{Duration{0}, Duration::millis(1), 0b1}};
    TasScheduler sched(cfg);
    RealClock clock;

    auto ring = DescriptorRing::create_in_process(64);
    std::atomic<bool> stop{false};
    std::vector<TxRecord> records;
    std::thread daemon([&] {
        records = run_release_loop(sched, clock, {&ring}, null_sink(), stop);
    });

    const Instant base = clock.now() + Duration::millis(5);
    for (std::uint64_t i = 0; i < 20; ++i) {
        auto d = desc_for(i, 0, (base + Duration::micros(200) * i).ns);
        REQUIRE(ring.push(d) == PushResult::Ok);
    }
    clock.sleep_until(base + Duration::millis(10));
    stop.store(true);
    daemon.join();

    REQUIRE(records.size() == 20);
    for (std::uint64_t i = 0; i < 20; ++i) {
        CHECK(records[i].seq == i);
        CHECK(records[i].release_time.ns >= (base + Duration::micros(200) * i).ns);
    }
    CHECK(sched.stats().released == 20);
}

} // TEST_SUITE
