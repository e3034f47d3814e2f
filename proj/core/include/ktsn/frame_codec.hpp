#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ktsn {

struct MacAddress {
    std::array<std::uint8_t, 6> octets{};
    auto operator<=>(const MacAddress&) const = default;
};

struct Ipv4Address {
    std::array<std::uint8_t, 4> octets{};
    auto operator<=>(const Ipv4Address&) const = default;
};

/// Addressing carried end to end: the encoder writes these fields into the
/// frame verbatim, source side included.
struct FlowTuple {
    MacAddress src_mac;
    MacAddress dst_mac;
    Ipv4Address src_ip;
    Ipv4Address dst_ip;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    auto operator<=>(const FlowTuple&) const = default;
};

/// A wire-order Ethernet II frame. Multi-byte fields are big-endian.
struct Frame {
    std::vector<std::uint8_t> bytes;
    std::size_t size() const { return bytes.size(); }
    bool operator==(const Frame&) const = default;
};

enum class CodecErrc {
    PayloadTooLarge,
    TruncatedFrame,
    BadIpChecksum,
    BadUdpChecksum,
    NotUdp,
    InnerTooLarge,
    NotVxlan,
    BadVxlanFlags,
    BadVni,
};

class CodecError : public std::runtime_error {
public:
    CodecError(CodecErrc errc, const std::string& what)
        : std::runtime_error(what), errc_(errc) {}
    CodecErrc errc() const { return errc_; }

private:
    CodecErrc errc_;
};

inline constexpr std::size_t kEthHeaderLen = 14;
inline constexpr std::size_t kIpv4HeaderLen = 20;
inline constexpr std::size_t kUdpHeaderLen = 8;
inline constexpr std::size_t kVxlanHeaderLen = 8;
inline constexpr std::size_t kMaxFrameLen = 1514;
inline constexpr std::size_t kMaxUdpPayload = 1472;
inline constexpr std::uint16_t kVxlanDefaultPort = 4789;
inline constexpr std::uint8_t kDefaultTtl = 64;

struct VxlanParams {
    std::uint32_t vni = 0; // < 2^24, enforced by make()
    FlowTuple outer;

    static VxlanParams make(std::uint32_t vni, const FlowTuple& outer);
    bool operator==(const VxlanParams&) const = default;
};

struct EncodeOptions {
    std::uint8_t ttl = kDefaultTtl;
    std::uint16_t ip_ident = 0;        // low 16 bits of the flow's seq counter
    bool udp_checksum = true;          // zero checksum is legal over IPv4
};

/// RFC 1071 ones'-complement sum; odd lengths padded with a zero byte.
std::uint16_t internet_checksum(std::span<const std::uint8_t> data);

Frame encode_udp_frame(const FlowTuple& flow, std::span<const std::uint8_t> payload,
                       const EncodeOptions& opts = {});

struct DecodedUdp {
    FlowTuple flow;
    std::vector<std::uint8_t> payload;
};

DecodedUdp decode_udp_frame(const Frame& frame);

/// Wraps `inner` in Eth/IPv4/UDP/VXLAN using params.outer; the outer UDP
/// source port is a per-flow hash folded into 49152..65535.
Frame vxlan_encap(const Frame& inner, const VxlanParams& params);

struct DecapResult {
    std::uint32_t vni = 0;
    Frame inner;
};

DecapResult vxlan_decap(const Frame& outer, std::uint16_t vxlan_port = kVxlanDefaultPort);

} // namespace ktsn
