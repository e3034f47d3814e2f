#include "ktsn/shim.hpp"

namespace ktsn {

TsnSocket TsnSocket::open(FlowTuple flow, std::uint8_t traffic_class,
                          const std::string& ring_path, ShimConfig cfg) {
    auto ring = std::make_unique<DescriptorRing>(DescriptorRing::attach_shared_file(ring_path));
    TsnSocket sock(std::move(flow), traffic_class, ring.get(), cfg);
    sock.owned_ring_ = std::move(ring);
    return sock;
}

TsnSocket::TsnSocket(FlowTuple flow, std::uint8_t traffic_class, DescriptorRing* ring,
                     ShimConfig cfg)
    : flow_(std::move(flow)), traffic_class_(traffic_class), cfg_(cfg), ring_(ring) {}

SendStatus TsnSocket::send_txtime(std::span<const std::uint8_t> payload, Instant txtime,
                                  Clock& clock) {
    if (payload.size() > kMaxUdpPayload)
        throw CodecError(CodecErrc::PayloadTooLarge, "payload exceeds 1472 bytes");

    PacketDescriptor desc;
    desc.seq = seq_counter_;
    desc.txtime = txtime;
    desc.traffic_class = traffic_class_;
    desc.flow = flow_;
    desc.payload.assign(payload.begin(), payload.end());

    DescriptorRing* ring = owned_ring_ ? owned_ring_.get() : ring_;
    if (ring->push(desc) == PushResult::Ok) {
        ++seq_counter_;
        return SendStatus::Sent;
    }
    // Full ring: spin for at most max_spin, then surface the backpressure.
    // The iteration cap keeps simulated clocks (where now() does not advance
    // on its own) from spinning forever.
    const Instant give_up = clock.now() + cfg_.max_spin;
    for (int tries = 0; tries < 100000 && clock.now() < give_up; ++tries) {
        if (ring->push(desc) == PushResult::Ok) {
            ++seq_counter_;
            return SendStatus::Sent;
        }
    }
    return SendStatus::WouldBlock;
}

void TsnSocket::send_plain(std::span<const std::uint8_t> payload) {
    if (payload.size() > kMaxUdpPayload)
        throw CodecError(CodecErrc::PayloadTooLarge, "payload exceeds 1472 bytes");
    if (!plain_sender_) throw std::runtime_error("no plain sender configured");
    plain_sender_(flow_, payload);
}

} // namespace ktsn
