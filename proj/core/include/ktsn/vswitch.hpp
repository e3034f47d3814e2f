#pragma once

#include "ktsn/frame_codec.hpp"
#include "ktsn/transport.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

namespace ktsn {

using PortId = std::uint32_t;

struct MacTableConfig {
    Duration ttl = Duration::seconds(300);
    std::size_t max_entries = 1024;
};

/// Learned MAC -> port map with entry expiry and a size bound (oldest entry
/// evicted first).
class MacTable {
public:
    explicit MacTable(MacTableConfig cfg) : cfg_(cfg) {}

    void learn(const MacAddress& mac, PortId port, Instant now);
    std::optional<PortId> lookup(const MacAddress& mac, Instant now) const;
    std::size_t size() const { return entries_.size(); }

private:
    struct Entry {
        PortId port;
        Instant last_seen;
    };
    MacTableConfig cfg_;
    std::map<MacAddress, Entry> entries_;
};

struct SwitchStats {
    std::uint64_t forwarded_unicast = 0;
    std::uint64_t flooded = 0;
    std::uint64_t malformed_dropped = 0;
    std::uint64_t tunnel_tx = 0;
    std::uint64_t tunnel_rx = 0;
};

/// Userspace L2 learning switch with VXLAN tunnel ports. Single forwarding
/// context; transports hand received datagrams in via ingress_tunnel.
class VirtualSwitch {
public:
    using LocalDeliver = std::function<void(const Frame&, Instant)>;

    explicit VirtualSwitch(MacTableConfig mac_cfg = {},
                           std::uint16_t vxlan_port = kVxlanDefaultPort)
        : table_(mac_cfg), vxlan_port_(vxlan_port) {}

    void add_local_port(PortId id, LocalDeliver deliver);
    void add_tunnel_port(PortId id, VxlanParams params, Endpoint remote,
                         DatagramTransport& transport);

    /// Frame handed in by a locally attached endpoint (scheduler egress,
    /// listener, baseline sender).
    void ingress_local(PortId port, const Frame& frame, Instant now);

    /// Raw outer datagram received by a tunnel port's transport.
    void ingress_tunnel(PortId port, std::span<const std::uint8_t> outer_bytes, Instant now);

    const SwitchStats& stats() const { return stats_; }

private:
    struct LocalPort {
        LocalDeliver deliver;
    };
    struct TunnelPort {
        VxlanParams params;
        Endpoint remote;
        DatagramTransport* transport;
    };
    using Port = std::variant<LocalPort, TunnelPort>;

    void forward(PortId ingress, const Frame& frame, Instant now);
    void egress(PortId port, const Frame& frame, Instant now);

    MacTable table_;
    std::uint16_t vxlan_port_;
    std::map<PortId, Port> ports_;
    SwitchStats stats_;
};

/// Kernel-path analog used for baseline runs: VXLAN encapsulation done
/// in-process, then straight out through the datagram transport with no
/// txtime handling and no gating.
void baseline_path_send(DatagramTransport& transport, const Endpoint& remote,
                        const FlowTuple& flow, std::span<const std::uint8_t> payload,
                        const VxlanParams& overlay);

} // namespace ktsn
