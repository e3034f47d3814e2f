#include "ktsn/frame_codec.hpp"

namespace ktsn {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::size_t at, std::uint16_t v) {
    out[at] = static_cast<std::uint8_t>(v >> 8);
    out[at + 1] = static_cast<std::uint8_t>(v & 0xff);
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

// FNV-1a over the inner frame's addressing fields only; ident, checksums and
// lengths vary per packet and must not perturb the outer source port.
std::uint64_t inner_flow_hash(const Frame& inner) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint8_t byte) {
        h ^= byte;
        h *= 1099511628211ull;
    };
    const auto& b = inner.bytes;
    for (std::size_t i = 0; i < 12 && i < b.size(); ++i) mix(b[i]); // eth dst+src
    if (b.size() >= kEthHeaderLen + kIpv4HeaderLen) {
        for (std::size_t i = 26; i < 34; ++i) mix(b[i]); // ip src+dst
    }
    if (b.size() >= kEthHeaderLen + kIpv4HeaderLen + 4) {
        for (std::size_t i = 34; i < 38; ++i) mix(b[i]); // udp ports
    }
    return h;
}

} // namespace

std::uint16_t internet_checksum(std::span<const std::uint8_t> data) {
    std::uint32_t sum = 0;
    std::size_t i = 0;
    for (; i + 1 < data.size(); i += 2)
        sum += static_cast<std::uint32_t>((data[i] << 8) | data[i + 1]);
    if (i < data.size()) sum += static_cast<std::uint32_t>(data[i] << 8);
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum & 0xffff);
}

VxlanParams VxlanParams::make(std::uint32_t vni, const FlowTuple& outer) {
    if (vni >= (1u << 24)) throw CodecError(CodecErrc::BadVni, "vni exceeds 24 bits");
    VxlanParams p;
    p.vni = vni;
    p.outer = outer;
    if (p.outer.dst_port == 0) p.outer.dst_port = kVxlanDefaultPort;
    return p;
}

Frame encode_udp_frame(const FlowTuple& flow, std::span<const std::uint8_t> payload,
                       const EncodeOptions& opts) {
    if (payload.size() > kMaxUdpPayload)
        throw CodecError(CodecErrc::PayloadTooLarge, "udp payload exceeds 1472 bytes");

    const std::size_t ip_total = kIpv4HeaderLen + kUdpHeaderLen + payload.size();
    const std::size_t udp_len = kUdpHeaderLen + payload.size();
    Frame f;
    f.bytes.resize(kEthHeaderLen + ip_total);
    auto& b = f.bytes;

    // Ethernet II
    std::copy(flow.dst_mac.octets.begin(), flow.dst_mac.octets.end(), b.begin());
    std::copy(flow.src_mac.octets.begin(), flow.src_mac.octets.end(), b.begin() + 6);
    put_u16(b, 12, 0x0800);

    // IPv4, no options, DF set, no fragmentation
    b[14] = 0x45;
    b[15] = 0x00;
    put_u16(b, 16, static_cast<std::uint16_t>(ip_total));
    put_u16(b, 18, opts.ip_ident);
    put_u16(b, 20, 0x4000); // DF
    b[22] = opts.ttl;
    b[23] = 17; // UDP
    put_u16(b, 24, 0); // checksum placeholder
    std::copy(flow.src_ip.octets.begin(), flow.src_ip.octets.end(), b.begin() + 26);
    std::copy(flow.dst_ip.octets.begin(), flow.dst_ip.octets.end(), b.begin() + 30);
    put_u16(b, 24, internet_checksum({b.data() + 14, kIpv4HeaderLen}));

    // UDP
    put_u16(b, 34, flow.src_port);
    put_u16(b, 36, flow.dst_port);
    put_u16(b, 38, static_cast<std::uint16_t>(udp_len));
    put_u16(b, 40, 0);
    std::copy(payload.begin(), payload.end(), b.begin() + 42);

    if (opts.udp_checksum) {
        std::vector<std::uint8_t> pseudo;
        pseudo.reserve(12 + udp_len);
        pseudo.insert(pseudo.end(), flow.src_ip.octets.begin(), flow.src_ip.octets.end());
        pseudo.insert(pseudo.end(), flow.dst_ip.octets.begin(), flow.dst_ip.octets.end());
        pseudo.push_back(0);
        pseudo.push_back(17);
        pseudo.push_back(static_cast<std::uint8_t>(udp_len >> 8));
        pseudo.push_back(static_cast<std::uint8_t>(udp_len & 0xff));
        pseudo.insert(pseudo.end(), b.begin() + 34, b.end());
        std::uint16_t csum = internet_checksum(pseudo);
        if (csum == 0) csum = 0xffff; // RFC 768: transmitted zero means "no checksum"
        put_u16(b, 40, csum);
    }
    return f;
}

DecodedUdp decode_udp_frame(const Frame& frame) {
    const auto& b = frame.bytes;
    if (b.size() < kEthHeaderLen + kIpv4HeaderLen + kUdpHeaderLen)
        throw CodecError(CodecErrc::TruncatedFrame, "frame shorter than eth+ip+udp headers");
    if (get_u16(b, 12) != 0x0800)
        throw CodecError(CodecErrc::NotUdp, "ethertype is not IPv4");
    if (b[14] != 0x45)
        throw CodecError(CodecErrc::NotUdp, "unsupported IPv4 version/IHL");
    if (internet_checksum({b.data() + 14, kIpv4HeaderLen}) != 0)
        throw CodecError(CodecErrc::BadIpChecksum, "IPv4 header checksum mismatch");
    if (b[23] != 17)
        throw CodecError(CodecErrc::NotUdp, "IPv4 protocol is not UDP");

    const std::size_t ip_total = get_u16(b, 16);
    if (ip_total < kIpv4HeaderLen + kUdpHeaderLen || kEthHeaderLen + ip_total != b.size())
        throw CodecError(CodecErrc::TruncatedFrame, "IPv4 total length inconsistent with frame");
    const std::size_t udp_len = get_u16(b, 38);
    if (udp_len != ip_total - kIpv4HeaderLen)
        throw CodecError(CodecErrc::TruncatedFrame, "UDP length inconsistent with IPv4 total length");

    DecodedUdp out;
    std::copy(b.begin(), b.begin() + 6, out.flow.dst_mac.octets.begin());
    std::copy(b.begin() + 6, b.begin() + 12, out.flow.src_mac.octets.begin());
    std::copy(b.begin() + 26, b.begin() + 30, out.flow.src_ip.octets.begin());
    std::copy(b.begin() + 30, b.begin() + 34, out.flow.dst_ip.octets.begin());
    out.flow.src_port = get_u16(b, 34);
    out.flow.dst_port = get_u16(b, 36);

    if (get_u16(b, 40) != 0) {
        std::vector<std::uint8_t> pseudo;
        pseudo.reserve(12 + udp_len);
        pseudo.insert(pseudo.end(), b.begin() + 26, b.begin() + 34);
        pseudo.push_back(0);
        pseudo.push_back(17);
        pseudo.push_back(static_cast<std::uint8_t>(udp_len >> 8));
        pseudo.push_back(static_cast<std::uint8_t>(udp_len & 0xff));
        pseudo.insert(pseudo.end(), b.begin() + 34, b.end());
        if (internet_checksum(pseudo) != 0)
            throw CodecError(CodecErrc::BadUdpChecksum, "UDP checksum mismatch");
    }

    out.payload.assign(b.begin() + 42, b.end());
    return out;
}

Frame vxlan_encap(const Frame& inner, const VxlanParams& params) {
    if (inner.size() + kEthHeaderLen + kIpv4HeaderLen + kUdpHeaderLen + kVxlanHeaderLen >
        kMaxFrameLen)
        throw CodecError(CodecErrc::InnerTooLarge, "inner frame too large for VXLAN overhead");

    std::vector<std::uint8_t> payload(kVxlanHeaderLen + inner.size(), 0);
    payload[0] = 0x08; // I flag: VNI valid
    payload[4] = static_cast<std::uint8_t>((params.vni >> 16) & 0xff);
    payload[5] = static_cast<std::uint8_t>((params.vni >> 8) & 0xff);
    payload[6] = static_cast<std::uint8_t>(params.vni & 0xff);
    std::copy(inner.bytes.begin(), inner.bytes.end(), payload.begin() + kVxlanHeaderLen);

    FlowTuple outer = params.outer;
    outer.src_port = static_cast<std::uint16_t>(49152 + inner_flow_hash(inner) % 16384);
    return encode_udp_frame(outer, payload);
}

DecapResult vxlan_decap(const Frame& outer, std::uint16_t vxlan_port) {
    DecodedUdp udp = decode_udp_frame(outer);
    if (udp.flow.dst_port != vxlan_port)
        throw CodecError(CodecErrc::NotVxlan, "outer UDP destination port is not the VXLAN port");
    if (udp.payload.size() < kVxlanHeaderLen)
        throw CodecError(CodecErrc::NotVxlan, "outer payload shorter than a VXLAN header");
    if ((udp.payload[0] & 0x08) == 0)
        throw CodecError(CodecErrc::BadVxlanFlags, "VXLAN I flag not set");

    DecapResult res;
    res.vni = (static_cast<std::uint32_t>(udp.payload[4]) << 16) |
              (static_cast<std::uint32_t>(udp.payload[5]) << 8) |
              static_cast<std::uint32_t>(udp.payload[6]);
    res.inner.bytes.assign(udp.payload.begin() + kVxlanHeaderLen, udp.payload.end());
    return res;
}

} // namespace ktsn
