#include "ktsn/vswitch.hpp"

namespace ktsn {

void MacTable::learn(const MacAddress& mac, PortId port, Instant now) {
    auto it = entries_.find(mac);
    if (it != entries_.end()) {
        it->second = Entry{port, now};
        return;
    }
    if (entries_.size() >= cfg_.max_entries) {
        auto oldest = entries_.begin();
        for (auto e = entries_.begin(); e != entries_.end(); ++e)
            if (e->second.last_seen < oldest->second.last_seen) oldest = e;
        entries_.erase(oldest);
    }
    entries_.emplace(mac, Entry{port, now});
}

std::optional<PortId> MacTable::lookup(const MacAddress& mac, Instant now) const {
    auto it = entries_.find(mac);
    if (it == entries_.end()) return std::nullopt;
    if (now.ns - it->second.last_seen.ns > cfg_.ttl.ns) return std::nullopt;
    return it->second.port;
}

void VirtualSwitch::add_local_port(PortId id, LocalDeliver deliver) {
    ports_.emplace(id, LocalPort{std::move(deliver)});
}

void VirtualSwitch::add_tunnel_port(PortId id, VxlanParams params, Endpoint remote,
                                    DatagramTransport& transport) {
    ports_.emplace(id, TunnelPort{std::move(params), std::move(remote), &transport});
}

void VirtualSwitch::ingress_local(PortId port, const Frame& frame, Instant now) {
    if (frame.size() < kEthHeaderLen || frame.size() > kMaxFrameLen) {
        ++stats_.malformed_dropped;
        return;
    }
    forward(port, frame, now);
}

void VirtualSwitch::ingress_tunnel(PortId port, std::span<const std::uint8_t> outer_bytes,
                                   Instant now) {
    ++stats_.tunnel_rx;
    Frame outer;
    outer.bytes.assign(outer_bytes.begin(), outer_bytes.end());
    Frame inner;
    try {
        inner = vxlan_decap(outer, vxlan_port_).inner;
    } catch (const CodecError&) {
        ++stats_.malformed_dropped;
        return;
    }
    if (inner.size() < kEthHeaderLen) {
        ++stats_.malformed_dropped;
        return;
    }
    forward(port, inner, now);
}

void VirtualSwitch::forward(PortId ingress_port, const Frame& frame, Instant now) {
    MacAddress src, dst;
    std::copy(frame.bytes.begin(), frame.bytes.begin() + 6, dst.octets.begin());
    std::copy(frame.bytes.begin() + 6, frame.bytes.begin() + 12, src.octets.begin());
    table_.learn(src, ingress_port, now);

    if (auto out = table_.lookup(dst, now); out && *out != ingress_port) {
        ++stats_.forwarded_unicast;
        egress(*out, frame, now);
        return;
    }
    ++stats_.flooded;
    for (const auto& [id, port] : ports_) {
        if (id == ingress_port) continue;
        egress(id, frame, now);
    }
}

void VirtualSwitch::egress(PortId port_id, const Frame& frame, Instant now) {
    auto& port = ports_.at(port_id);
    if (auto* local = std::get_if<LocalPort>(&port)) {
        local->deliver(frame, now);
        return;
    }
    auto& tunnel = std::get<TunnelPort>(port);
    Frame outer = vxlan_encap(frame, tunnel.params);
    tunnel.transport->send(tunnel.remote, outer.bytes);
    ++stats_.tunnel_tx;
}

void baseline_path_send(DatagramTransport& transport, const Endpoint& remote,
                        const FlowTuple& flow, std::span<const std::uint8_t> payload,
                        const VxlanParams& overlay) {
    Frame inner = encode_udp_frame(flow, payload);
    Frame outer = vxlan_encap(inner, overlay);
    transport.send(remote, outer.bytes);
}

} // namespace ktsn
