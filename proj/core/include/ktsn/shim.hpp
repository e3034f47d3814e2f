#pragma once

#include "ktsn/clock.hpp"
#include "ktsn/ring.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>

namespace ktsn {

/// Regular-datapath sender used by send_plain; wired to the baseline overlay
/// path by the harness.
using PlainSender = std::function<void(const FlowTuple&, std::span<const std::uint8_t>)>;

struct ShimConfig {
    Duration max_spin = Duration::micros(10); // bounded retry on a full ring
};

enum class SendStatus { Sent, WouldBlock };

/// Application-facing socket: datagrams with an explicit transmission time go
/// through the descriptor ring to the daemon; plain sends bypass the ring and
/// take the regular path. One user context per socket (it is the ring's
/// single producer).
class TsnSocket {
public:
    /// Attaches to a daemon-created shared-file ring (path conveyed via
    /// KTSN_RING_PATH for the preload wrapper). Throws RingError with
    /// BackingUnavailable when the file is missing, HeaderMismatch when the
    /// layout does not validate.
    static TsnSocket open(FlowTuple flow, std::uint8_t traffic_class,
                          const std::string& ring_path, ShimConfig cfg = {});

    /// In-process variant for tests and single-process harness runs. The ring
    /// must outlive the socket.
    TsnSocket(FlowTuple flow, std::uint8_t traffic_class, DescriptorRing* ring,
              ShimConfig cfg = {});

    void set_plain_sender(PlainSender sender) { plain_sender_ = std::move(sender); }

    SendStatus send_txtime(std::span<const std::uint8_t> payload, Instant txtime, Clock& clock);
    void send_plain(std::span<const std::uint8_t> payload);

    std::uint64_t next_seq() const { return seq_counter_; }
    const FlowTuple& flow() const { return flow_; }

private:
    FlowTuple flow_;
    std::uint8_t traffic_class_;
    ShimConfig cfg_;
    DescriptorRing* ring_;
    std::unique_ptr<DescriptorRing> owned_ring_; // set when attached by path
    PlainSender plain_sender_;
    std::uint64_t seq_counter_ = 0;
};

} // namespace ktsn
