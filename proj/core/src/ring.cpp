#include "ktsn/ring.hpp"

#include <atomic>
#include <bit>
#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

namespace ktsn {

namespace {

// Fixed little-endian layout for header fields and descriptors.
void put_le16(std::uint8_t* p, std::uint16_t v) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
}
void put_le32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
void put_le64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
std::uint16_t get_le16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t get_le32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}
std::uint64_t get_le64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

// File header offsets. head and tail sit on separate cache lines.
constexpr std::size_t kOffMagic = 0;
constexpr std::size_t kOffVersion = 4;
constexpr std::size_t kOffCapacity = 8;
constexpr std::size_t kOffSlotSize = 12;
constexpr std::size_t kOffHead = 16;
constexpr std::size_t kOffTail = 64;

void validate_geometry(std::uint32_t capacity, std::uint32_t slot_size) {
    if (capacity < 2 || !std::has_single_bit(capacity))
        throw RingError(RingErrc::BadCapacity, "capacity must be a power of two >= 2");
    if (slot_size < DescriptorRing::kMinSlotSize)
        throw RingError(RingErrc::BadSlotSize, "slot_size below descriptor header + max payload");
}

} // namespace

DescriptorRing DescriptorRing::create_in_process(std::uint32_t capacity, std::uint32_t slot_size) {
    validate_geometry(capacity, slot_size);
    DescriptorRing r;
    r.heap_.assign(kFileHeaderLen + static_cast<std::size_t>(capacity) * slot_size, 0);
    r.base_ = r.heap_.data();
    r.region_len_ = r.heap_.size();
    put_le32(r.base_ + kOffMagic, kMagic);
    put_le16(r.base_ + kOffVersion, kVersion);
    put_le32(r.base_ + kOffCapacity, capacity);
    put_le32(r.base_ + kOffSlotSize, slot_size);
    r.capacity_ = capacity;
    r.slot_size_ = slot_size;
    return r;
}

DescriptorRing DescriptorRing::create_shared_file(const std::string& path, std::uint32_t capacity,
                                                  std::uint32_t slot_size) {
    validate_geometry(capacity, slot_size);
    const std::size_t len = kFileHeaderLen + static_cast<std::size_t>(capacity) * slot_size;
    int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC, 0644);
    if (fd < 0)
        throw RingError(RingErrc::BackingUnavailable,
                        "cannot create ring file " + path + ": " + std::strerror(errno));
    if (::ftruncate(fd, static_cast<off_t>(len)) != 0) {
        ::close(fd);
        throw RingError(RingErrc::BackingUnavailable,
                        "cannot size ring file " + path + ": " + std::strerror(errno));
    }
    void* mem = ::mmap(nullptr, len, PROT_READ | PROT_WRITE, MAP_SHARED, fd, 0);
    ::close(fd);
    if (mem == MAP_FAILED)
        throw RingError(RingErrc::BackingUnavailable,
                        "cannot map ring file " + path + ": " + std::strerror(errno));

    DescriptorRing r;
    r.base_ = static_cast<std::uint8_t*>(mem);
    r.region_len_ = len;
    r.mapped_ = true;
    std::memset(r.base_, 0, kFileHeaderLen);
    put_le32(r.base_ + kOffMagic, kMagic);
    put_le16(r.base_ + kOffVersion, kVersion);
    put_le32(r.base_ + kOffCapacity, capacity);
    put_le32(r.base_ + kOffSlotSize, slot_size);
    r.capacity_ = capacity;
    r.slot_size_ = slot_size;
    return r;
}

DescriptorRing DescriptorRing::attach_shared_file(const std::string& path) {
    int fd = ::open(path.c_str(), O_RDWR);
    if (fd < 0)
        throw RingError(RingErrc::BackingUnavailable,
                        "cannot open ring file " + path + ": " + std::strerror(errno));
    struct stat st{};
    if (::fstat(fd, &st) != 0 || st.st_size < static_cast<off_t>(kFileHeaderLen)) {
        ::close(fd);
        throw RingError(RingErrc::HeaderMismatch, "ring file too small: " + path);
    }
    void* mem = ::mmap(nullptr, static_cast<std::size_t>(st.st_size), PROT_READ | PROT_WRITE,
                       MAP_SHARED, fd, 0);
    ::close(fd);
    if (mem == MAP_FAILED)
        throw RingError(RingErrc::BackingUnavailable,
                        "cannot map ring file " + path + ": " + std::strerror(errno));

    DescriptorRing r;
    r.base_ = static_cast<std::uint8_t*>(mem);
    r.region_len_ = static_cast<std::size_t>(st.st_size);
    r.mapped_ = true;
    r.init_from_header();
    return r;
}

void DescriptorRing::init_from_header() {
    if (get_le32(base_ + kOffMagic) != kMagic)
        throw RingError(RingErrc::HeaderMismatch, "bad ring magic");
    if (get_le16(base_ + kOffVersion) != kVersion)
        throw RingError(RingErrc::HeaderMismatch, "ring layout version mismatch");
    capacity_ = get_le32(base_ + kOffCapacity);
    slot_size_ = get_le32(base_ + kOffSlotSize);
    validate_geometry(capacity_, slot_size_);
    const std::size_t expect = kFileHeaderLen + static_cast<std::size_t>(capacity_) * slot_size_;
    if (region_len_ != expect)
        throw RingError(RingErrc::HeaderMismatch, "ring file length inconsistent with header");
}

DescriptorRing::DescriptorRing(DescriptorRing&& other) noexcept { *this = std::move(other); }

DescriptorRing& DescriptorRing::operator=(DescriptorRing&& other) noexcept {
    if (this != &other) {
        if (mapped_ && base_) ::munmap(base_, region_len_);
        heap_ = std::move(other.heap_);
        base_ = heap_.empty() ? other.base_ : heap_.data();
        region_len_ = other.region_len_;
        mapped_ = other.mapped_;
        capacity_ = other.capacity_;
        slot_size_ = other.slot_size_;
        other.base_ = nullptr;
        other.mapped_ = false;
    }
    return *this;
}

DescriptorRing::~DescriptorRing() {
    if (mapped_ && base_) ::munmap(base_, region_len_);
}

std::size_t DescriptorRing::approx_size() const {
    std::atomic_ref<std::uint64_t> head(*reinterpret_cast<std::uint64_t*>(base_ + kOffHead));
    std::atomic_ref<std::uint64_t> tail(*reinterpret_cast<std::uint64_t*>(base_ + kOffTail));
    return static_cast<std::size_t>(head.load(std::memory_order_acquire) -
                                    tail.load(std::memory_order_acquire));
}

PushResult DescriptorRing::push(const PacketDescriptor& desc) {
    std::atomic_ref<std::uint64_t> head(*reinterpret_cast<std::uint64_t*>(base_ + kOffHead));
    std::atomic_ref<std::uint64_t> tail(*reinterpret_cast<std::uint64_t*>(base_ + kOffTail));
    const std::uint64_t h = head.load(std::memory_order_relaxed);
    const std::uint64_t t = tail.load(std::memory_order_acquire);
    if (h - t >= capacity_) return PushResult::WouldBlock;

    std::uint8_t* slot = base_ + kFileHeaderLen +
                         static_cast<std::size_t>(h & (capacity_ - 1)) * slot_size_;
    put_le64(slot, desc.seq);
    put_le64(slot + 8, desc.txtime.ns);
    slot[16] = desc.traffic_class;
    slot[17] = 0;
    put_le16(slot + 18, desc.flow.src_port);
    put_le16(slot + 20, desc.flow.dst_port);
    put_le16(slot + 22, static_cast<std::uint16_t>(desc.payload.size()));
    std::memcpy(slot + 24, desc.flow.src_mac.octets.data(), 6);
    std::memcpy(slot + 30, desc.flow.dst_mac.octets.data(), 6);
    std::memcpy(slot + 36, desc.flow.src_ip.octets.data(), 4);
    std::memcpy(slot + 40, desc.flow.dst_ip.octets.data(), 4);
    std::memset(slot + 44, 0, 4);
    if (!desc.payload.empty())
        std::memcpy(slot + kDescHeaderLen, desc.payload.data(), desc.payload.size());

    head.store(h + 1, std::memory_order_release);
    return PushResult::Ok;
}

std::optional<PacketDescriptor> DescriptorRing::pop() {
    std::atomic_ref<std::uint64_t> head(*reinterpret_cast<std::uint64_t*>(base_ + kOffHead));
    std::atomic_ref<std::uint64_t> tail(*reinterpret_cast<std::uint64_t*>(base_ + kOffTail));
    const std::uint64_t t = tail.load(std::memory_order_relaxed);
    const std::uint64_t h = head.load(std::memory_order_acquire);
    if (t == h) return std::nullopt;

    const std::uint8_t* slot = base_ + kFileHeaderLen +
                               static_cast<std::size_t>(t & (capacity_ - 1)) * slot_size_;
    PacketDescriptor desc;
    desc.seq = get_le64(slot);
    desc.txtime = Instant{get_le64(slot + 8)};
    desc.traffic_class = slot[16];
    desc.flow.src_port = get_le16(slot + 18);
    desc.flow.dst_port = get_le16(slot + 20);
    const std::uint16_t len = get_le16(slot + 22);
    std::memcpy(desc.flow.src_mac.octets.data(), slot + 24, 6);
    std::memcpy(desc.flow.dst_mac.octets.data(), slot + 30, 6);
    std::memcpy(desc.flow.src_ip.octets.data(), slot + 36, 4);
    std::memcpy(desc.flow.dst_ip.octets.data(), slot + 40, 4);
    desc.payload.assign(slot + kDescHeaderLen, slot + kDescHeaderLen + len);

    tail.store(t + 1, std::memory_order_release);
    return desc;
}

} // namespace ktsn
