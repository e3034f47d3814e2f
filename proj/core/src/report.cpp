#include "ktsn/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace ktsn {

namespace {

std::string run_basename(const RunData& run) {
    return to_string(run.mode) + "_" + std::to_string(run.payload_size);
}

void write_run_csv(const RunData& run, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StatsError("cannot write " + path);
    out << "# mode=" << to_string(run.mode) << " payload=" << run.payload_size
        << " period_ns=" << run.period.ns << " warmup=" << run.warmup
        << " expected=" << run.expected_count << "\n";
    out << "seq,txtime_ns,t_send_ns,t_arrival_ns,latency_ns,jitter_ns\n";
    const RunRecord* prev = nullptr;
    for (const RunRecord& r : run.records) {
        std::int64_t latency =
            run.mode == BenchMode::TsnPath
                ? static_cast<std::int64_t>(r.t_arrival.ns) - static_cast<std::int64_t>(r.txtime.ns)
                : static_cast<std::int64_t>(r.t_arrival.ns) - static_cast<std::int64_t>(r.t_send.ns);
        out << r.seq << ',' << r.txtime.ns << ',' << r.t_send.ns << ',' << r.t_arrival.ns << ','
            << latency << ',';
        if (prev && r.seq == prev->seq + 1) {
            out << (static_cast<std::int64_t>(r.t_arrival.ns) -
                    static_cast<std::int64_t>(prev->t_arrival.ns) -
                    static_cast<std::int64_t>(run.period.ns));
        }
        out << '\n';
        prev = &r;
    }
}

void write_cdf_csv(const RunStats& stats, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StatsError("cannot write " + path);
    out << "latency_ns,cumulative_fraction\n";
    if (stats.latencies.empty()) return;
    std::vector<std::int64_t> sorted = stats.latencies;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    char buf[32];
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        // emit one row per distinct value, at its last occurrence
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        std::snprintf(buf, sizeof(buf), "%.6f", static_cast<double>(i + 1) / n);
        out << sorted[i] << ',' << buf << '\n';
    }
}

} // namespace

void emit_report(const std::vector<RunData>& runs, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);

    // deterministic order: mode then payload
    std::vector<const RunData*> ordered;
    for (const RunData& r : runs) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(), [](const RunData* a, const RunData* b) {
        if (a->mode != b->mode) return a->mode < b->mode;
        return a->payload_size < b->payload_size;
    });

    std::ofstream summary(out_dir + "/summary.csv", std::ios::trunc);
    if (!summary) throw StatsError("cannot write " + out_dir + "/summary.csv");
    summary << "mode,payload,n,median_ns,p90_ns,p99_ns,min_ns,max_ns,loss\n";

    const double points[] = {0.5, 0.9, 0.99};
    for (const RunData* run : ordered) {
        write_run_csv(*run, out_dir + "/run_" + run_basename(*run) + ".csv");
        RunStats stats = build_stats(run->records, run->period, run->mode, run->warmup,
                                     run->expected_count, run->payload_size);
        write_cdf_csv(stats, out_dir + "/cdf_" + run_basename(*run) + ".csv");

        summary << to_string(run->mode) << ',' << run->payload_size << ','
                << stats.latencies.size() << ',';
        if (stats.latencies.empty()) {
            summary << ",,,,," << stats.loss_count << '\n';
            continue;
        }
        auto pct = compute_percentiles(stats.latencies, points);
        auto [mn, mx] = std::minmax_element(stats.latencies.begin(), stats.latencies.end());
        summary << pct[0] << ',' << pct[1] << ',' << pct[2] << ',' << *mn << ',' << *mx << ','
                << stats.loss_count << '\n';
    }
}

RunData load_run_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StatsError("cannot open " + path);
    RunData run;
    std::string line;

    if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
        throw StatsError(path + ": missing metadata header");
    std::istringstream meta(line.substr(2));
    std::string kv;
    while (meta >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string key = kv.substr(0, eq);
        std::string val = kv.substr(eq + 1);
        if (key == "mode")
            run.mode = (val == "tsn") ? BenchMode::TsnPath : BenchMode::BaselineSleepLoop;
        else if (key == "payload")
            run.payload_size = std::stoull(val);
        else if (key == "period_ns")
            run.period = Duration{std::stoull(val)};
        else if (key == "warmup")
            run.warmup = std::stoull(val);
        else if (key == "expected")
            run.expected_count = std::stoull(val);
    }

    std::getline(in, line); // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        RunRecord r;
        char comma;
        std::uint64_t txtime, tsend, tarr;
        row >> r.seq >> comma >> txtime >> comma >> tsend >> comma >> tarr;
        r.txtime = Instant{txtime};
        r.t_send = Instant{tsend};
        r.t_arrival = Instant{tarr};
        run.records.push_back(r);
    }
    return run;
}

} // namespace ktsn
