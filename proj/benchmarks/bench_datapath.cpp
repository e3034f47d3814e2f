// Microbenchmarks for the hot datapath pieces: checksum, frame encode/decode,
// VXLAN encap, ring push/pop, and the scheduler's release computation.
#include "ktsn/harness.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace ktsn;

namespace {

std::vector<std::uint8_t> make_payload(std::size_t n) {
    std::vector<std::uint8_t> p(n);
    std::mt19937_64 rng(7);
    for (auto& b : p) b = static_cast<std::uint8_t>(rng());
    return p;
}

void BM_InternetChecksum(benchmark::State& state) {
    auto data = make_payload(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(internet_checksum(data));
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_InternetChecksum)->Arg(64)->Arg(256)->Arg(1024)->Arg(1472);

void BM_EncodeUdpFrame(benchmark::State& state) {
    auto payload = make_payload(static_cast<std::size_t>(state.range(0)));
    const FlowTuple flow = bench_flow();
    for (auto _ : state) benchmark::DoNotOptimize(encode_udp_frame(flow, payload));
}
BENCHMARK(BM_EncodeUdpFrame)->Arg(64)->Arg(256)->Arg(1024);

void BM_DecodeUdpFrame(benchmark::State& state) {
    auto payload = make_payload(static_cast<std::size_t>(state.range(0)));
    const Frame frame = encode_udp_frame(bench_flow(), payload);
    for (auto _ : state) benchmark::DoNotOptimize(decode_udp_frame(frame));
}
BENCHMARK(BM_DecodeUdpFrame)->Arg(64)->Arg(256)->Arg(1024);

void BM_VxlanEncapDecap(benchmark::State& state) {
    auto payload = make_payload(256);
    const Frame inner = encode_udp_frame(bench_flow(), payload);
    const VxlanParams params = bench_overlay(kVxlanDefaultPort);
    for (auto _ : state) {
        Frame outer = vxlan_encap(inner, params);
        benchmark::DoNotOptimize(vxlan_decap(outer));
    }
}
BENCHMARK(BM_VxlanEncapDecap);

void BM_RingPushPop(benchmark::State& state) {
    auto ring = DescriptorRing::create_in_process(1024);
    PacketDescriptor d;
    d.flow = bench_flow();
    d.payload = make_payload(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        d.seq++;
        benchmark::DoNotOptimize(ring.push(d));
        benchmark::DoNotOptimize(ring.pop());
    }
}
BENCHMARK(BM_RingPushPop)->Arg(64)->Arg(256)->Arg(1024);

void BM_SchedulerSubmitRelease(benchmark::State& state) {
    SchedulerConfig cfg = all_open_config();
    SimClock clock;
    PacketDescriptor d;
    d.flow = bench_flow();
    d.payload = make_payload(64);
    EgressSink sink = [](const Frame&, const TxRecord&) { return true; };
    for (auto _ : state) {
        state.PauseTiming();
        TasScheduler sched(cfg);
        for (std::uint64_t i = 0; i < 64; ++i) {
            d.seq = i;
            d.txtime = Instant{1000 + i * 10};
            sched.submit(d, Instant{1});
        }
        state.ResumeTiming();
        benchmark::DoNotOptimize(drain_release_loop(sched, clock, sink));
    }
}
BENCHMARK(BM_SchedulerSubmitRelease)->Unit(benchmark::kMicrosecond);

void BM_NextGateOpen(benchmark::State& state) {
    GateControlList gcl;
    gcl.cycle = Duration::millis(1);
    gcl.num_classes = 4;
    for (int i = 0; i < 4; ++i)
        gcl.slots.push_back(GclSlot{Duration{std::uint64_t(i) * 250'000}, Duration{250'000},
                                    static_cast<std::uint8_t>(1u << i)});
    std::uint64_t t = 0;
    for (auto _ : state) {
        t = (t + 77'777) % 100'000'000;
        benchmark::DoNotOptimize(next_gate_open(gcl, static_cast<std::uint8_t>(t % 4), Instant{t}));
    }
}
BENCHMARK(BM_NextGateOpen);

} // namespace

BENCHMARK_MAIN();
