#include <doctest.h>

#include "ktsn/ring.hpp"
#include "support/ring_model.hpp"

#include <cstdio>
#include <filesystem>
#include <random>
#include <thread>

using namespace ktsn;
using namespace ktsn::testing;

namespace {

PacketDescriptor make_desc(std::uint64_t seq, std::size_t payload_len = 16) {
    PacketDescriptor d;
    d.seq = seq;
    d.txtime = Instant{seq * 1000};
    d.traffic_class = static_cast<std::uint8_t>(seq % 4);
    d.flow.src_mac = {{0x02, 0, 0, 0, 0, 1}};
    d.flow.dst_mac = {{0x02, 0, 0, 0, 0, 2}};
    d.flow.src_ip = {{10, 0, 0, 1}};
    d.flow.dst_ip = {{10, 0, 0, 2}};
    d.flow.src_port = 1111;
    d.flow.dst_port = 2222;
    d.payload.assign(payload_len, static_cast<std::uint8_t>(seq));
    return d;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_SUITE("shm-channel") {

TEST_CASE("a fresh ring is empty") {
    auto ring = DescriptorRing::create_in_process(1024, 1536);
    CHECK(ring.capacity() == 1024);
    CHECK(ring.approx_size() == 0);
    CHECK_FALSE(ring.pop().has_value());
}

TEST_CASE("capacity must be a power of two") {
    CHECK_THROWS_AS(DescriptorRing::create_in_process(1000), RingError);
    CHECK_THROWS_AS(DescriptorRing::create_in_process(1), RingError);
    try {
        DescriptorRing::create_in_process(1000);
    } catch (const RingError& e) {
        CHECK(e.errc() == RingErrc::BadCapacity);
    }
}

TEST_CASE("shared file on an unwritable path is BackingUnavailable") {
    try {
        DescriptorRing::create_shared_file("/proc/nope/ring", 4);
        FAIL("expected BackingUnavailable");
    } catch (const RingError& e) {
        CHECK(e.errc() == RingErrc::BackingUnavailable);
    }
}

TEST_CASE("push then pop returns the identical descriptor") {
    auto ring = DescriptorRing::create_in_process(4);
    PacketDescriptor d = make_desc(1, 64);
    REQUIRE(ring.push(d) == PushResult::Ok);
    auto got = ring.pop();
    REQUIRE(got.has_value());
    CHECK(*got == d);
}

TEST_CASE("FIFO order by seq") {
    auto ring = DescriptorRing::create_in_process(4);
    ring.push(make_desc(1));
    ring.push(make_desc(2));
    CHECK(ring.pop()->seq == 1);
    CHECK(ring.pop()->seq == 2);
}

TEST_CASE("a full ring reports WouldBlock, never drops") {
    auto ring = DescriptorRing::create_in_process(4);
    for (std::uint64_t i = 0; i < 4; ++i) CHECK(ring.push(make_desc(i)) == PushResult::Ok);
    CHECK(ring.push(make_desc(4)) == PushResult::WouldBlock);
    for (std::uint64_t i = 0; i < 4; ++i) CHECK(ring.pop()->seq == i);
    CHECK_FALSE(ring.pop().has_value());
}

TEST_CASE("indices wrap correctly far past capacity") {
    auto ring = DescriptorRing::create_in_process(8);
    std::uint64_t seq = 0, expect = 0;
    for (int round = 0; round < 80; ++round) {
        for (int i = 0; i < 5; ++i) REQUIRE(ring.push(make_desc(seq++)) == PushResult::Ok);
        for (int i = 0; i < 5; ++i) REQUIRE(ring.pop()->seq == expect++);
    }
    CHECK(ring.approx_size() == 0);
}

TEST_CASE("shared-file backing round-trips through a second mapping") {
    const std::string path = temp_path("ktsn_ring_test.bin");
    auto producer = DescriptorRing::create_shared_file(path, 16);
    auto consumer = DescriptorRing::attach_shared_file(path);

    for (std::uint64_t i = 0; i < 10; ++i)
        REQUIRE(producer.push(make_desc(i, 100)) == PushResult::Ok);
    for (std::uint64_t i = 0; i < 10; ++i) {
        auto got = consumer.pop();
        REQUIRE(got.has_value());
        CHECK(*got == make_desc(i, 100));
    }
    std::filesystem::remove(path);
}

TEST_CASE("attach validates magic and version") {
    const std::string path = temp_path("ktsn_ring_bad.bin");
    {
        auto ring = DescriptorRing::create_shared_file(path, 4);
    }
    // clobber the magic
    {
        FILE* f = std::fopen(path.c_str(), "r+b");
        REQUIRE(f);
        std::fputc(0x00, f);
        std::fclose(f);
    }
    try {
        DescriptorRing::attach_shared_file(path);
        FAIL("expected HeaderMismatch");
    } catch (const RingError& e) {
        CHECK(e.errc() == RingErrc::HeaderMismatch);
    }
    std::filesystem::remove(path);
}

TEST_CASE("differential: both backings behave identically on a random schedule") {
    const std::string path = temp_path("ktsn_ring_diff.bin");
    auto a = DescriptorRing::create_in_process(8);
    auto b = DescriptorRing::create_shared_file(path, 8);

    std::mt19937_64 rng(23);
    std::uint64_t seq = 0;
    for (int i = 0; i < 20000; ++i) {
        if (rng() % 2) {
            PacketDescriptor d = make_desc(seq, seq % 200);
            auto ra = a.push(d);
            auto rb = b.push(d);
            CHECK(ra == rb);
            if (ra == PushResult::Ok) ++seq;
        } else {
            auto da = a.pop();
            auto db = b.pop();
            CHECK(da == db);
        }
    }
    std::filesystem::remove(path);
}

TEST_CASE("exhaustive interleaving: capacity 2") {
    auto r = model_check_ring<2>(6);
    CHECK(r.completed);
    CHECK_FALSE(r.fifo_violation);
    CHECK_FALSE(r.bound_violation);
    CHECK(r.states_explored > 30);
}

TEST_CASE("exhaustive interleaving: capacity 4") {
    auto r = model_check_ring<4>(8);
    CHECK(r.completed);
    CHECK_FALSE(r.fifo_violation);
    CHECK_FALSE(r.bound_violation);
}

TEST_CASE("two-thread stress preserves gapless seq") {
    auto ring = DescriptorRing::create_in_process(256);
    constexpr std::uint64_t kCount = 100000;

    std::thread producer([&] {
        for (std::uint64_t i = 0; i < kCount;) {
            if (ring.push(make_desc(i, i % 64)) == PushResult::Ok) ++i;
        }
    });

    std::uint64_t expect = 0;
    while (expect < kCount) {
        if (auto d = ring.pop()) {
            REQUIRE(d->seq == expect);
            ++expect;
        }
    }
    producer.join();
    CHECK(expect == kCount);
}

} // TEST_SUITE
