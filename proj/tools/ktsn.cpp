// ktsn command line: daemon, switch, talker, listener, bench, report.
//
// Cross-process wire contract: every OS UDP datagram between these tools
// carries one full outer Ethernet frame (VXLAN encapsulated). All processes
// use the machine monotonic epoch so txtimes agree across them.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.
#include "ktsn/gcl_config.hpp"
#include "ktsn/harness.hpp"
#include "ktsn/report.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

using namespace ktsn;

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true, std::memory_order_release); }

void install_signal_handlers() {
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
}

/// Thrown for invalid configuration discovered after CLI11 parsing.
class ConfigFailure : public std::runtime_error {
public:
    explicit ConfigFailure(const std::string& what) : std::runtime_error(what) {}
};

Endpoint parse_endpoint(const std::string& s) {
    auto colon = s.rfind(':');
    if (colon == std::string::npos || colon + 1 >= s.size())
        throw ConfigFailure("bad endpoint '" + s + "', expected host:port");
    int port = 0;
    try {
        port = std::stoi(s.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigFailure("bad port in endpoint '" + s + "'");
    }
    if (port < 1 || port > 65535) throw ConfigFailure("port out of range in '" + s + "'");
    return Endpoint{s.substr(0, colon), static_cast<std::uint16_t>(port)};
}

/// Overlay addressing for the standalone tools; the inner flow already
/// carries the application addressing, the outer one only needs to be
/// self-consistent.
VxlanParams tool_overlay(std::uint32_t vni, std::uint16_t vxlan_port) {
    FlowTuple outer;
    outer.src_mac = {{0x02, 0x4b, 0x54, 0x00, 0x00, 0x01}};
    outer.dst_mac = {{0x02, 0x4b, 0x54, 0x00, 0x00, 0x02}};
    outer.src_ip = {{127, 0, 0, 1}};
    outer.dst_ip = {{127, 0, 0, 1}};
    outer.src_port = 0; // recomputed per flow by the encapsulator
    outer.dst_port = vxlan_port;
    return VxlanParams::make(vni, outer);
}

BenchMode parse_mode(const std::string& s) {
    if (s == "tsn") return BenchMode::TsnPath;
    if (s == "baseline") return BenchMode::BaselineSleepLoop;
    throw ConfigFailure("unknown mode '" + s + "', expected tsn or baseline");
}

// ---- daemon ------------------------------------------------------------

struct DaemonArgs {
    std::string gcl_path;
    std::string ring_path;
    std::uint64_t capacity = 4096;
    std::string peer = "127.0.0.1:15000";
    std::uint32_t vni = 42;
    std::uint16_t vxlan_port = kVxlanDefaultPort;
};

int cmd_daemon(const DaemonArgs& args) {
    SchedulerConfig cfg = load_scheduler_config(args.gcl_path);
    const Endpoint peer = parse_endpoint(args.peer);
    const VxlanParams overlay = tool_overlay(args.vni, args.vxlan_port);

    auto ring = DescriptorRing::create_shared_file(args.ring_path, args.capacity);
    TasScheduler sched(cfg);
    RealClock clock(cfg.spin_window, ClockEpoch::Machine);
    UdpTransport udp(clock);

    install_signal_handlers();
    std::cerr << "ktsn daemon: ring " << args.ring_path << " (capacity " << args.capacity
              << "), egress vxlan vni " << args.vni << " -> " << peer.str() << "\n";

    EgressSink sink = [&](const Frame& frame, const TxRecord&) {
        Frame outer = vxlan_encap(frame, overlay);
        udp.send(peer, outer.bytes);
        return true;
    };
    auto records = run_release_loop(sched, clock, {&ring}, sink, g_stop);

    const auto& st = sched.stats();
    std::cerr << "ktsn daemon: released " << records.size() << ", dropped_late "
              << st.dropped_late << ", egress_stalls " << st.egress_stalls << "\n";
    return 0;
}

// ---- switch ------------------------------------------------------------

struct PortSpec {
    bool tunnel = false;
    std::uint16_t udp_port = 0;
    Endpoint remote;     // tunnel: peer switch; local: attached endpoint
    std::uint32_t vni = 0;
};

PortSpec parse_port_spec(const std::string& s) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto next = s.find(':', pos);
        if (next == std::string::npos) next = s.size();
        parts.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    auto want = [&](std::size_t n, const char* shape) {
        if (parts.size() != n)
            throw ConfigFailure("bad port spec '" + s + "', expected " + shape);
    };
    PortSpec spec;
    try {
        if (!parts.empty() && parts[0] == "local") {
            // local:<udp_port>:<deliver_host>:<deliver_port>
            want(4, "local:<udp_port>:<host>:<port>");
            spec.udp_port = static_cast<std::uint16_t>(std::stoi(parts[1]));
            spec.remote = parse_endpoint(parts[2] + ":" + parts[3]);
        } else if (!parts.empty() && parts[0] == "tunnel") {
            // tunnel:<udp_port>:<remote_host>:<remote_port>:<vni>
            want(5, "tunnel:<udp_port>:<host>:<port>:<vni>");
            spec.tunnel = true;
            spec.udp_port = static_cast<std::uint16_t>(std::stoi(parts[1]));
            spec.remote = parse_endpoint(parts[2] + ":" + parts[3]);
            spec.vni = static_cast<std::uint32_t>(std::stoul(parts[4]));
        } else {
            throw ConfigFailure("bad port spec '" + s + "', expected local:... or tunnel:...");
        }
    } catch (const ConfigFailure&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigFailure("bad number in port spec '" + s + "'");
    }
    return spec;
}

struct SwitchArgs {
    std::vector<std::string> ports;
    std::uint16_t vxlan_port = kVxlanDefaultPort;
};

int cmd_switch(const SwitchArgs& args) {
    if (args.ports.empty()) throw ConfigFailure("switch needs at least one --ports entry");
    std::vector<PortSpec> specs;
    for (const auto& s : args.ports) specs.push_back(parse_port_spec(s));

    RealClock clock(Duration::micros(100), ClockEpoch::Machine);
    VirtualSwitch vswitch({}, args.vxlan_port);
    std::mutex mu; // VirtualSwitch is single-context; receivers serialize here
    std::vector<std::unique_ptr<UdpTransport>> transports;

    for (PortId id = 0; id < specs.size(); ++id) {
        const PortSpec& spec = specs[id];
        auto udp = std::make_unique<UdpTransport>(clock, spec.udp_port);
        if (spec.tunnel) {
            vswitch.add_tunnel_port(id, tool_overlay(spec.vni, args.vxlan_port), spec.remote,
                                    *udp);
            udp->start_receiver([&vswitch, &mu, id](std::vector<std::uint8_t>&& bytes,
                                                    Instant at) {
                std::lock_guard lk(mu);
                vswitch.ingress_tunnel(id, bytes, at);
            });
        } else {
            UdpTransport* raw = udp.get();
            Endpoint deliver_to = spec.remote;
            vswitch.add_local_port(id, [raw, deliver_to](const Frame& frame, Instant) {
                raw->send(deliver_to, frame.bytes);
            });
            udp->start_receiver([&vswitch, &mu, id](std::vector<std::uint8_t>&& bytes,
                                                    Instant at) {
                std::lock_guard lk(mu);
                vswitch.ingress_local(id, Frame{std::move(bytes)}, at);
            });
        }
        std::cerr << "ktsn switch: port " << id << (spec.tunnel ? " tunnel" : " local")
                  << " on udp " << udp->local_port() << " -> " << spec.remote.str() << "\n";
        transports.push_back(std::move(udp));
    }

    install_signal_handlers();
    while (!g_stop.load(std::memory_order_acquire))
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    for (auto& t : transports) t->stop();

    const auto& st = vswitch.stats();
    std::cerr << "ktsn switch: unicast " << st.forwarded_unicast << ", flooded " << st.flooded
              << ", tunnel rx/tx " << st.tunnel_rx << "/" << st.tunnel_tx << ", malformed "
              << st.malformed_dropped << "\n";
    return 0;
}

// ---- talker ------------------------------------------------------------

struct TalkerArgs {
    std::string mode = "tsn";
    std::size_t payload = 256;
    std::uint64_t period_ns = 1'000'000;
    std::uint64_t count = 10000;
    std::uint64_t warmup = 100;
    std::uint64_t lead_ns = 500'000;
    std::uint64_t start_delay_ns = 50'000'000;
    std::string ring_path;     // env KTSN_RING_PATH
    std::uint8_t traffic_class = 0; // env KTSN_CLASS
    std::string dest = "127.0.0.1:15000"; // baseline mode
    std::uint32_t vni = 42;
    std::uint16_t vxlan_port = kVxlanDefaultPort;
};

int cmd_talker(const TalkerArgs& args) {
    BenchConfig cfg;
    cfg.mode = parse_mode(args.mode);
    cfg.payload_size = args.payload;
    cfg.period = Duration{args.period_ns};
    cfg.count = args.count;
    cfg.warmup = args.warmup;
    cfg.lead = Duration{args.lead_ns};
    validate_bench_config(cfg);

    RealClock clock(Duration::micros(100), ClockEpoch::Machine);
    TalkerLog log;

    if (cfg.mode == BenchMode::TsnPath) {
        if (args.ring_path.empty())
            throw ConfigFailure("tsn mode needs --ring (or KTSN_RING_PATH)");
        TsnSocket sock = TsnSocket::open(bench_flow(), args.traffic_class, args.ring_path);
        log = talker_run_tsn(sock, clock, cfg, clock.now() + Duration{args.start_delay_ns});
    } else {
        const Endpoint dest = parse_endpoint(args.dest);
        const VxlanParams overlay = tool_overlay(args.vni, args.vxlan_port);
        UdpTransport udp(clock);
        auto ring = DescriptorRing::create_in_process(2); // unused in baseline mode
        TsnSocket sock(bench_flow(), args.traffic_class, &ring);
        sock.set_plain_sender([&](const FlowTuple& flow, std::span<const std::uint8_t> p) {
            baseline_path_send(udp, dest, flow, p, overlay);
        });
        log = talker_run_baseline(sock, clock, cfg);
    }

    std::cerr << "ktsn talker: attempted " << log.attempted << ", sent " << log.sent
              << ", wouldblock " << log.wouldblock << "\n";
    return log.sent == log.attempted ? 0 : 2;
}

// ---- listener ----------------------------------------------------------

struct ListenerArgs {
    std::uint64_t expect = 0;
    std::string out;
    std::uint16_t port = 15000;
    std::uint16_t vxlan_port = kVxlanDefaultPort;
    std::uint64_t timeout_ms = 60000;
    // run metadata recorded in the CSV; must match the talker's settings
    std::string mode = "tsn";
    std::size_t payload = 256;
    std::uint64_t period_ns = 1'000'000;
    std::uint64_t warmup = 100;
};

int cmd_listener(const ListenerArgs& args) {
    RealClock clock(Duration::micros(100), ClockEpoch::Machine);
    const BenchMode mode = parse_mode(args.mode);
    UdpTransport udp(clock, args.port);
    BenchListener listener;
    udp.start_receiver([&](std::vector<std::uint8_t>&& bytes, Instant at) {
        try {
            DecapResult dec = vxlan_decap(Frame{std::move(bytes)}, args.vxlan_port);
            listener.on_frame(dec.inner, at);
        } catch (const CodecError&) {
            // non-measurement or malformed datagram; ignore
        }
    });
    std::cerr << "ktsn listener: udp " << udp.local_port() << ", expecting " << args.expect
              << "\n";

    install_signal_handlers();
    const Instant deadline = clock.now() + Duration{args.timeout_ms * 1'000'000};
    while (listener.received() < args.expect && clock.now() < deadline &&
           !g_stop.load(std::memory_order_acquire))
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    udp.stop();

    RunData run;
    run.mode = mode;
    run.payload_size = args.payload;
    run.period = Duration{args.period_ns};
    run.warmup = args.warmup;
    run.expected_count = args.expect;
    run.records = listener.take_records();
    emit_report({run}, args.out);

    std::cerr << "ktsn listener: received " << run.records.size() << "/" << args.expect
              << ", report in " << args.out << "\n";
    if (run.records.size() < args.expect) {
        std::cerr << "ktsn listener: timed out with partial results\n";
        return 2;
    }
    return 0;
}

// ---- bench -------------------------------------------------------------

struct BenchArgs {
    std::string out = "bench-results";
    std::uint64_t count = 10000;
    std::uint64_t warmup = 100;
    std::uint64_t period_ns = 1'000'000;
    std::vector<std::size_t> payloads = {64, 256, 1024};
    std::string mode = "both";
};

int cmd_bench(const BenchArgs& args) {
    std::vector<BenchMode> modes;
    if (args.mode == "both")
        modes = {BenchMode::TsnPath, BenchMode::BaselineSleepLoop};
    else
        modes = {parse_mode(args.mode)};

    RealClock clock(Duration::micros(100));
    std::vector<RunData> runs;
    for (std::size_t payload : args.payloads) {
        for (BenchMode mode : modes) {
            BenchConfig cfg;
            cfg.mode = mode;
            cfg.payload_size = payload;
            cfg.period = Duration{args.period_ns};
            cfg.count = args.count;
            cfg.warmup = args.warmup;
            validate_bench_config(cfg);

            std::cerr << "ktsn bench: " << to_string(mode) << " payload " << payload << " x "
                      << cfg.count << "...\n";
            auto result = run_loopback_benchmark(cfg, all_open_config(), clock);
            auto stats = build_stats(result.run.records, cfg.period, mode, cfg.warmup,
                                     cfg.count, payload);
            const double pts[] = {0.5, 0.9, 0.99};
            auto pcts = compute_percentiles(stats.latencies, pts);
            std::cerr << "  received " << result.run.records.size() << ", latency p50/p90/p99 "
                      << pcts[0] << "/" << pcts[1] << "/" << pcts[2] << " ns, loss "
                      << stats.loss_count << ", dropped_late " << result.sched_stats.dropped_late
                      << ", wouldblock " << result.talker.wouldblock << "\n";
            runs.push_back(std::move(result.run));
        }
    }
    emit_report(runs, args.out);
    std::cerr << "ktsn bench: report written to " << args.out << "\n";
    return 0;
}

// ---- report ------------------------------------------------------------

struct ReportArgs {
    std::string in;
    std::string out;
};

int cmd_report(const ReportArgs& args) {
    std::vector<RunData> runs;
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(args.in))
        throw ConfigFailure("input directory " + args.in + " does not exist");
    for (const auto& entry : std::filesystem::directory_iterator(args.in)) {
        const std::string name = entry.path().filename().string();
        if (name.starts_with("run_") && name.ends_with(".csv")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) runs.push_back(load_run_csv(f.string()));
    if (runs.empty()) throw ConfigFailure("no run_*.csv files in " + args.in);
    emit_report(runs, args.out);
    std::cerr << "ktsn report: " << runs.size() << " runs -> " << args.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Userspace TSN datapath: time-aware shaper daemon, VXLAN switch, benchmark "
                 "talker/listener"};
    app.require_subcommand(1);

    DaemonArgs daemon_args;
    auto* daemon = app.add_subcommand("daemon", "Run the TAS scheduler daemon");
    daemon->add_option("--gcl", daemon_args.gcl_path, "Gate control list config (JSON)")
        ->required();
    daemon->add_option("--ring", daemon_args.ring_path, "Shared ring file to create")
        ->required();
    daemon->add_option("--capacity", daemon_args.capacity, "Ring capacity (power of two)");
    daemon->add_option("--peer", daemon_args.peer, "Egress endpoint host:port");
    daemon->add_option("--vni", daemon_args.vni, "VXLAN network identifier");
    daemon->add_option("--vxlan-port", daemon_args.vxlan_port, "Outer VXLAN UDP dst port");

    SwitchArgs switch_args;
    auto* vsw = app.add_subcommand("switch", "Run the learning switch with VXLAN tunnels");
    vsw->add_option("--ports", switch_args.ports,
                    "Port specs: local:<udp_port>:<host>:<port> or "
                    "tunnel:<udp_port>:<host>:<port>:<vni>")
        ->required();
    vsw->add_option("--vxlan-port", switch_args.vxlan_port, "VXLAN UDP port for decap");

    TalkerArgs talker_args;
    auto* talker = app.add_subcommand("talker", "Send periodic measurement messages");
    talker->add_option("--mode", talker_args.mode, "tsn or baseline")->required();
    talker->add_option("--payload", talker_args.payload, "Payload bytes (24..1472)");
    talker->add_option("--period-ns", talker_args.period_ns, "Send period T in ns");
    talker->add_option("--count", talker_args.count, "Messages to send");
    talker->add_option("--warmup", talker_args.warmup, "Leading messages excluded from stats");
    talker->add_option("--lead-ns", talker_args.lead_ns, "Push descriptors this far before txtime");
    talker->add_option("--start-delay-ns", talker_args.start_delay_ns,
                       "Delay before the first txtime");
    talker->add_option("--ring", talker_args.ring_path, "Daemon ring file (tsn mode)")
        ->envname("KTSN_RING_PATH");
    talker->add_option("--class", talker_args.traffic_class, "Traffic class id")
        ->envname("KTSN_CLASS");
    talker->add_option("--dest", talker_args.dest, "Destination host:port (baseline mode)");
    talker->add_option("--vni", talker_args.vni, "VXLAN network identifier (baseline mode)");
    talker->add_option("--vxlan-port", talker_args.vxlan_port, "Outer VXLAN UDP dst port");

    ListenerArgs listener_args;
    auto* listener = app.add_subcommand("listener", "Receive measurement messages, write CSVs");
    listener->add_option("--expect", listener_args.expect, "Messages expected")->required();
    listener->add_option("--out", listener_args.out, "Report output directory")->required();
    listener->add_option("--port", listener_args.port, "UDP port to bind");
    listener->add_option("--vxlan-port", listener_args.vxlan_port, "VXLAN UDP port for decap");
    listener->add_option("--timeout-ms", listener_args.timeout_ms, "Receive timeout");
    listener->add_option("--mode", listener_args.mode, "Run metadata: tsn or baseline");
    listener->add_option("--payload", listener_args.payload, "Run metadata: payload bytes");
    listener->add_option("--period-ns", listener_args.period_ns, "Run metadata: period ns");
    listener->add_option("--warmup", listener_args.warmup, "Run metadata: warmup count");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Run the full loopback benchmark matrix");
    bench->add_option("--out", bench_args.out, "Report output directory");
    bench->add_option("--count", bench_args.count, "Messages per run");
    bench->add_option("--warmup", bench_args.warmup, "Leading messages excluded from stats");
    bench->add_option("--period-ns", bench_args.period_ns, "Send period T in ns");
    bench->add_option("--payloads", bench_args.payloads, "Payload sizes to sweep");
    bench->add_option("--mode", bench_args.mode, "tsn, baseline, or both");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Recompute CDFs and summary from run CSVs");
    report->add_option("--in", report_args.in, "Directory with run_*.csv files")->required();
    report->add_option("--out", report_args.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (daemon->parsed()) return cmd_daemon(daemon_args);
        if (vsw->parsed()) return cmd_switch(switch_args);
        if (talker->parsed()) return cmd_talker(talker_args);
        if (listener->parsed()) return cmd_listener(listener_args);
        if (bench->parsed()) return cmd_bench(bench_args);
        if (report->parsed()) return cmd_report(report_args);
    } catch (const ConfigFailure& e) {
        std::cerr << "ktsn: " << e.what() << "\n";
        return 1;
    } catch (const GclConfigError& e) {
        std::cerr << "ktsn: " << e.what() << "\n";
        return 1;
    } catch (const GclError& e) {
        std::cerr << "ktsn: " << e.what() << "\n";
        return 1;
    } catch (const BenchConfigError& e) {
        std::cerr << "ktsn: " << e.what() << "\n";
        return 1;
    } catch (const RingError& e) {
        std::cerr << "ktsn: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "ktsn: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
