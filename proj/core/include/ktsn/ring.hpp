#pragma once

#include "ktsn/frame_codec.hpp"
#include "ktsn/time.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ktsn {

/// One application datagram plus scheduling metadata, as carried from the
/// client shim to the daemon.
struct PacketDescriptor {
    std::uint64_t seq = 0;
    Instant txtime{0}; // 0 = no explicit transmission time
    std::uint8_t traffic_class = 0;
    FlowTuple flow;
    std::vector<std::uint8_t> payload;

    bool operator==(const PacketDescriptor&) const = default;
};

enum class RingErrc {
    BadCapacity,
    BadSlotSize,
    BackingUnavailable,
    HeaderMismatch,
};

class RingError : public std::runtime_error {
public:
    RingError(RingErrc errc, const std::string& what)
        : std::runtime_error(what), errc_(errc) {}
    RingErrc errc() const { return errc_; }

private:
    RingErrc errc_;
};

enum class PushResult { Ok, WouldBlock };

/// Bounded single-producer/single-consumer descriptor channel. Two backings
/// with identical semantics: an in-process buffer and a mapped shared file
/// (layout documented in docs/ring-format.md). head/tail publication uses
/// release/acquire ordering; one producer and one consumer per ring.
class DescriptorRing {
public:
    // Descriptor header bytes preceding the inline payload in each slot.
    static constexpr std::uint32_t kDescHeaderLen = 48;
    static constexpr std::uint32_t kMinSlotSize = kDescHeaderLen + kMaxUdpPayload;
    static constexpr std::uint32_t kFileHeaderLen = 128;
    static constexpr std::uint32_t kMagic = 0x4B54534E; // "KTSN"
    static constexpr std::uint16_t kVersion = 1;

    static DescriptorRing create_in_process(std::uint32_t capacity,
                                            std::uint32_t slot_size = kMinSlotSize);
    static DescriptorRing create_shared_file(const std::string& path, std::uint32_t capacity,
                                             std::uint32_t slot_size = kMinSlotSize);
    static DescriptorRing attach_shared_file(const std::string& path);

    DescriptorRing(DescriptorRing&&) noexcept;
    DescriptorRing& operator=(DescriptorRing&&) noexcept;
    DescriptorRing(const DescriptorRing&) = delete;
    DescriptorRing& operator=(const DescriptorRing&) = delete;
    ~DescriptorRing();

    PushResult push(const PacketDescriptor& desc);
    std::optional<PacketDescriptor> pop();

    std::uint32_t capacity() const { return capacity_; }
    std::uint32_t slot_size() const { return slot_size_; }
    std::size_t approx_size() const;

private:
    DescriptorRing() = default;
    void init_from_header();

    std::uint8_t* base_ = nullptr;  // start of the mapped/allocated region
    std::size_t region_len_ = 0;
    std::vector<std::uint8_t> heap_; // in-process backing owns memory here
    bool mapped_ = false;
    std::uint32_t capacity_ = 0;
    std::uint32_t slot_size_ = 0;
};

} // namespace ktsn
