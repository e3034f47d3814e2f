#pragma once

#include "ktsn/tas.hpp"

#include <stdexcept>
#include <string>

namespace ktsn {

class GclConfigError : public std::runtime_error {
public:
    explicit GclConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses a GCL config file (JSON):
///   {
///     "cycle_ns": 1000000,
///     "base_time_ns": 0,
///     "num_classes": 2,
///     "past_txtime_policy": "drop" | "send_immediately",
///     "slots": [ { "offset_ns": 0, "length_ns": 500000, "open_classes": [0] }, ... ]
///   }
/// The returned config is already gcl_validate()d; errors carry field context.
SchedulerConfig load_scheduler_config(const std::string& path);
SchedulerConfig parse_scheduler_config(const std::string& json_text, const std::string& origin);

} // namespace ktsn
