#include "ktsn/harness.hpp"

#include <bit>
#include <chrono>
#include <limits>
#include <cstring>
#include <thread>

namespace ktsn {

namespace {

void put_le64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_le64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

constexpr std::uint16_t kBenchVxlanPort = 14789; // unprivileged stand-in for 4789

} // namespace

void validate_bench_config(const BenchConfig& cfg) {
    if (cfg.count < 2) throw BenchConfigError("count must be >= 2 (jitter needs pairs)");
    if (cfg.payload_size < kBenchPayloadMin || cfg.payload_size > kMaxUdpPayload)
        throw BenchConfigError("payload_size must be in [24, 1472]");
    if (cfg.period.ns == 0) throw BenchConfigError("period must be positive");
    if (cfg.warmup >= cfg.count) throw BenchConfigError("warmup must be < count");
}

std::vector<std::uint8_t> encode_bench_payload(std::uint64_t seq, Instant txtime, Instant t_send,
                                               std::size_t payload_size) {
    std::vector<std::uint8_t> buf(payload_size, 0);
    put_le64(buf.data(), seq);
    put_le64(buf.data() + 8, txtime.ns);
    put_le64(buf.data() + 16, t_send.ns);
    return buf;
}

std::optional<BenchSample> decode_bench_payload(std::span<const std::uint8_t> payload) {
    if (payload.size() < kBenchPayloadMin) return std::nullopt;
    return BenchSample{get_le64(payload.data()), Instant{get_le64(payload.data() + 8)},
                       Instant{get_le64(payload.data() + 16)}};
}

void BenchListener::on_frame(const Frame& frame, Instant now) {
    BenchSample sample{};
    try {
        DecodedUdp udp = decode_udp_frame(frame);
        auto decoded = decode_bench_payload(udp.payload);
        if (!decoded) return;
        sample = *decoded;
    } catch (const CodecError&) {
        return;
    }
    std::lock_guard lk(mu_);
    records_.push_back(RunRecord{sample.seq, sample.txtime, sample.t_send, now});
}

std::size_t BenchListener::received() const {
    std::lock_guard lk(mu_);
    return records_.size();
}

std::vector<RunRecord> BenchListener::take_records() {
    std::lock_guard lk(mu_);
    return std::move(records_);
}

TalkerLog talker_run_tsn(TsnSocket& sock, Clock& clock, const BenchConfig& cfg, Instant base) {
    validate_bench_config(cfg);
    TalkerLog log;
    log.base = base;
    for (std::uint64_t i = 0; i < cfg.count; ++i) {
        Instant txtime = base + cfg.period * i;
        clock.sleep_until(txtime - cfg.lead);
        auto payload = encode_bench_payload(sock.next_seq(), txtime, clock.now(), cfg.payload_size);
        ++log.attempted;
        if (sock.send_txtime(payload, txtime, clock) == SendStatus::Sent)
            ++log.sent;
        else
            ++log.wouldblock;
    }
    return log;
}

TalkerLog talker_run_baseline(TsnSocket& sock, Clock& clock, const BenchConfig& cfg) {
    validate_bench_config(cfg);
    TalkerLog log;
    log.base = clock.now();
    for (std::uint64_t i = 0; i < cfg.count; ++i) {
        Instant t_send = clock.now();
        auto payload = encode_bench_payload(i, Instant{0}, t_send, cfg.payload_size);
        sock.send_plain(payload);
        ++log.attempted;
        ++log.sent;
        // the plain OS sleep, as a kernel-path app without txtime would do
        std::this_thread::sleep_for(std::chrono::nanoseconds(cfg.period.ns));
    }
    return log;
}

FlowTuple bench_flow() {
    FlowTuple f;
    f.src_mac = MacAddress{{0x02, 0x00, 0x00, 0x00, 0x00, 0x01}};
    f.dst_mac = MacAddress{{0x02, 0x00, 0x00, 0x00, 0x00, 0x02}};
    f.src_ip = Ipv4Address{{10, 0, 0, 1}};
    f.dst_ip = Ipv4Address{{10, 0, 0, 2}};
    f.src_port = 5001;
    f.dst_port = 5002;
    return f;
}

VxlanParams bench_overlay(std::uint16_t vxlan_port) {
    FlowTuple outer;
    outer.src_mac = MacAddress{{0x02, 0xaa, 0x00, 0x00, 0x00, 0x01}};
    outer.dst_mac = MacAddress{{0x02, 0xaa, 0x00, 0x00, 0x00, 0x02}};
    outer.src_ip = Ipv4Address{{192, 168, 100, 1}};
    outer.dst_ip = Ipv4Address{{192, 168, 100, 2}};
    outer.src_port = 49152;
    outer.dst_port = vxlan_port;
    return VxlanParams::make(42, outer);
}

SchedulerConfig all_open_config(Duration cycle, std::uint8_t num_classes) {
    SchedulerConfig cfg;
    cfg.gcl.cycle = cycle;
    cfg.gcl.num_classes = num_classes;
    cfg.gcl.slots = {GclSlot{Duration{0}, cycle,
                             static_cast<std::uint8_t>((1u << num_classes) - 1)}};
    return cfg;
}

PipelineResult run_loopback_benchmark(const BenchConfig& cfg, const SchedulerConfig& sched_cfg,
                                      RealClock& clock) {
    validate_bench_config(cfg);
    PipelineResult result;

    UdpTransport udp_tx(clock);
    UdpTransport udp_rx(clock);
    const Endpoint ep_rx{"127.0.0.1", udp_rx.local_port()};
    const VxlanParams overlay = bench_overlay(kBenchVxlanPort);

    VirtualSwitch sw_tx(MacTableConfig{}, kBenchVxlanPort);
    VirtualSwitch sw_rx(MacTableConfig{}, kBenchVxlanPort);
    BenchListener listener;

    sw_tx.add_tunnel_port(2, overlay, ep_rx, udp_tx);
    sw_rx.add_local_port(2, [&](const Frame& f, Instant t) { listener.on_frame(f, t); });

    udp_rx.start_receiver(
        [&](std::vector<std::uint8_t>&& bytes, Instant t) { sw_rx.ingress_tunnel(1, bytes, t); });

    if (cfg.mode == BenchMode::TsnPath) {
        DescriptorRing ring = DescriptorRing::create_in_process(4096);
        TasScheduler sched(sched_cfg);
        std::atomic<bool> stop{false};

        EgressSink egress = [&](const Frame& f, const TxRecord&) {
            sw_tx.ingress_local(1, f, clock.now());
            return true;
        };
        std::vector<TxRecord> tx_records;
        std::thread daemon([&] {
            tx_records = run_release_loop(sched, clock, {&ring}, egress, stop);
        });

        TsnSocket sock(bench_flow(), 0, &ring);
        Instant base = clock.now() + Duration::millis(50);
        result.talker = talker_run_tsn(sock, clock, cfg, base);

        // let in-flight messages drain
        Instant deadline = clock.now() + Duration::seconds(2);
        while (listener.received() < result.talker.sent && clock.now() < deadline)
            std::this_thread::sleep_for(std::chrono::milliseconds(1));

        stop.store(true, std::memory_order_release);
        daemon.join();
        result.tx_records = std::move(tx_records);
        result.sched_stats = sched.stats();
    } else {
        TsnSocket sock(bench_flow(), 0, nullptr);
        sock.set_plain_sender([&](const FlowTuple& flow, std::span<const std::uint8_t> payload) {
            baseline_path_send(udp_tx, ep_rx, flow, payload, overlay);
        });
        result.talker = talker_run_baseline(sock, clock, cfg);

        Instant deadline = clock.now() + Duration::seconds(2);
        while (listener.received() < result.talker.sent && clock.now() < deadline)
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }

    udp_rx.stop();
    udp_tx.stop();

    result.run.mode = cfg.mode;
    result.run.payload_size = cfg.payload_size;
    result.run.period = cfg.period;
    result.run.warmup = cfg.warmup;
    result.run.expected_count = cfg.count;
    result.run.records = listener.take_records();
    return result;
}

PipelineResult run_simulated_pipeline(const BenchConfig& cfg, const SchedulerConfig& sched_cfg,
                                      Duration hop_delay) {
    validate_bench_config(cfg);
    PipelineResult result;

    SimClock clock;
    MemNetwork net(clock, hop_delay);
    MemNetwork::Port port_tx = net.port();
    MemNetwork::Port port_rx = net.port();
    const Endpoint ep_tx{"sim", 1};
    const Endpoint ep_rx{"sim", 2};
    const VxlanParams overlay = bench_overlay(kBenchVxlanPort);

    VirtualSwitch sw_tx(MacTableConfig{}, kBenchVxlanPort);
    VirtualSwitch sw_rx(MacTableConfig{}, kBenchVxlanPort);
    BenchListener listener;

    sw_tx.add_tunnel_port(2, overlay, ep_rx, port_tx);
    sw_rx.add_tunnel_port(1, overlay, ep_tx, port_rx);
    sw_rx.add_local_port(2, [&](const Frame& f, Instant t) { listener.on_frame(f, t); });
    net.bind(ep_rx, [&](std::vector<std::uint8_t>&& bytes, Instant arrival) {
        sw_rx.ingress_tunnel(1, bytes, arrival);
    });
    net.bind(ep_tx, [](std::vector<std::uint8_t>&&, Instant) {});

    DescriptorRing ring = DescriptorRing::create_in_process(1024);
    TasScheduler sched(sched_cfg);
    TsnSocket sock(bench_flow(), 0, &ring);

    EgressSink egress = [&](const Frame& f, const TxRecord&) {
        sw_tx.ingress_local(1, f, clock.now());
        return true;
    };

    const Instant base = Instant{0} + cfg.lead + cfg.period;
    result.talker.base = base;
    for (std::uint64_t i = 0; i < cfg.count; ++i) {
        Instant txtime = base + cfg.period * i;
        clock.sleep_until(txtime - cfg.lead);
        auto payload = encode_bench_payload(sock.next_seq(), txtime, clock.now(), cfg.payload_size);
        ++result.talker.attempted;
        if (sock.send_txtime(payload, txtime, clock) == SendStatus::Sent)
            ++result.talker.sent;
        else
            ++result.talker.wouldblock;
        while (auto desc = ring.pop()) sched.submit(std::move(*desc), clock.now());

        Instant limit = (i + 1 < cfg.count)
                            ? base + cfg.period * (i + 1) - cfg.lead
                            : Instant{std::numeric_limits<std::uint64_t>::max()};
        auto released = drain_until(sched, clock, egress, limit);
        result.tx_records.insert(result.tx_records.end(), released.begin(), released.end());
    }
    result.sched_stats = sched.stats();

    result.run.mode = cfg.mode;
    result.run.payload_size = cfg.payload_size;
    result.run.period = cfg.period;
    result.run.warmup = cfg.warmup;
    result.run.expected_count = cfg.count;
    result.run.records = listener.take_records();
    return result;
}

} // namespace ktsn
