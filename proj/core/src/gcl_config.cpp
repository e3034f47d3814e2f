#include "ktsn/gcl_config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace ktsn {

namespace {

using nlohmann::json;

std::uint64_t require_u64(const json& obj, const std::string& field, const std::string& ctx) {
    if (!obj.contains(field))
        throw GclConfigError(ctx + ": missing field '" + field + "'");
    const json& v = obj.at(field);
    if (!v.is_number_unsigned())
        throw GclConfigError(ctx + ": field '" + field + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

} // namespace

SchedulerConfig parse_scheduler_config(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw GclConfigError(origin + ": " + e.what());
    }
    if (!root.is_object()) throw GclConfigError(origin + ": top level must be an object");

    SchedulerConfig cfg;
    cfg.gcl.cycle = Duration{require_u64(root, "cycle_ns", origin)};
    cfg.gcl.base_time = Instant{root.value("base_time_ns", std::uint64_t{0})};
    std::uint64_t num_classes = require_u64(root, "num_classes", origin);
    if (num_classes == 0 || num_classes > 8)
        throw GclConfigError(origin + ": num_classes must be in 1..8");
    cfg.gcl.num_classes = static_cast<std::uint8_t>(num_classes);

    if (root.contains("past_txtime_policy")) {
        const std::string policy = root.at("past_txtime_policy").get<std::string>();
        if (policy == "drop")
            cfg.past_txtime_policy = PastTxtimePolicy::Drop;
        else if (policy == "send_immediately")
            cfg.past_txtime_policy = PastTxtimePolicy::SendImmediately;
        else
            throw GclConfigError(origin + ": past_txtime_policy must be 'drop' or 'send_immediately'");
    }
    if (root.contains("release_tolerance_ns"))
        cfg.release_tolerance = Duration{root.at("release_tolerance_ns").get<std::uint64_t>()};
    if (root.contains("spin_window_ns"))
        cfg.spin_window = Duration{root.at("spin_window_ns").get<std::uint64_t>()};
    if (root.contains("udp_checksum")) cfg.udp_checksum = root.at("udp_checksum").get<bool>();

    if (!root.contains("slots") || !root.at("slots").is_array())
        throw GclConfigError(origin + ": missing 'slots' array");
    std::size_t idx = 0;
    for (const json& slot : root.at("slots")) {
        const std::string ctx = origin + ": slots[" + std::to_string(idx) + "]";
        GclSlot s;
        s.offset = Duration{require_u64(slot, "offset_ns", ctx)};
        s.length = Duration{require_u64(slot, "length_ns", ctx)};
        if (!slot.contains("open_classes") || !slot.at("open_classes").is_array())
            throw GclConfigError(ctx + ": missing 'open_classes' array");
        for (const json& cls : slot.at("open_classes")) {
            std::uint64_t id = cls.get<std::uint64_t>();
            if (id >= cfg.gcl.num_classes)
                throw GclConfigError(ctx + ": class id " + std::to_string(id) +
                                     " >= num_classes");
            s.open_classes |= static_cast<std::uint8_t>(1u << id);
        }
        cfg.gcl.slots.push_back(s);
        ++idx;
    }

    try {
        gcl_validate(cfg.gcl);
    } catch (const GclError& e) {
        throw GclConfigError(origin + ": invalid gate control list: " + e.what());
    }
    return cfg;
}

SchedulerConfig load_scheduler_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GclConfigError("cannot open GCL config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scheduler_config(ss.str(), path);
}

} // namespace ktsn
