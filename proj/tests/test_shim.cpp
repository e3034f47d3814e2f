#include <doctest.h>

#include "ktsn/harness.hpp"
#include "ktsn/shim.hpp"

#include <cstdio>
#include <filesystem>

using namespace ktsn;

TEST_SUITE("client-shim") {

TEST_CASE("opening against a valid shared ring starts at seq 0") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "ktsn_shim_ring.bin").string();
    auto daemon_ring = DescriptorRing::create_shared_file(path, 16);

    TsnSocket sock = TsnSocket::open(bench_flow(), 1, path);
    CHECK(sock.next_seq() == 0);

    SimClock clock;
    std::vector<std::uint8_t> payload(64, 0x7f);
    CHECK(sock.send_txtime(payload, Instant{1'000'000}, clock) == SendStatus::Sent);

    auto desc = daemon_ring.pop();
    REQUIRE(desc.has_value());
    CHECK(desc->seq == 0);
    CHECK(desc->txtime == Instant{1'000'000});
    CHECK(desc->traffic_class == 1);
    CHECK(desc->flow == bench_flow());
    CHECK(desc->payload == payload);
    std::filesystem::remove(path);
}

TEST_CASE("a missing ring file fails to attach") {
    try {
        TsnSocket::open(bench_flow(), 0, "/tmp/ktsn_no_such_ring.bin");
        FAIL("expected RingError");
    } catch (const RingError& e) {
        CHECK(e.errc() == RingErrc::BackingUnavailable);
    }
}

TEST_CASE("a ring with the wrong magic is a header mismatch") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "ktsn_shim_badmagic.bin").string();
    {
        auto ring = DescriptorRing::create_shared_file(path, 4);
    }
    {
        FILE* f = std::fopen(path.c_str(), "r+b");
        REQUIRE(f);
        std::fputc(0xFF, f);
        std::fclose(f);
    }
    try {
        TsnSocket::open(bench_flow(), 0, path);
        FAIL("expected HeaderMismatch");
    } catch (const RingError& e) {
        CHECK(e.errc() == RingErrc::HeaderMismatch);
    }
    std::filesystem::remove(path);
}

TEST_CASE("oversized payloads are rejected before touching the ring") {
    auto ring = DescriptorRing::create_in_process(4);
    TsnSocket sock(bench_flow(), 0, &ring);
    SimClock clock;
    std::vector<std::uint8_t> big(1473, 0);
    CHECK_THROWS_AS(sock.send_txtime(big, Instant{1}, clock), CodecError);
    CHECK(sock.next_seq() == 0);
    CHECK(ring.approx_size() == 0);
}

TEST_CASE("a saturated ring surfaces WouldBlock after the bounded spin") {
    auto ring = DescriptorRing::create_in_process(2);
    TsnSocket sock(bench_flow(), 0, &ring);
    SimClock clock;
    std::vector<std::uint8_t> payload(8, 1);
    CHECK(sock.send_txtime(payload, Instant{1}, clock) == SendStatus::Sent);
    CHECK(sock.send_txtime(payload, Instant{2}, clock) == SendStatus::Sent);
    CHECK(sock.send_txtime(payload, Instant{3}, clock) == SendStatus::WouldBlock);
    CHECK(sock.next_seq() == 2); // the failed send consumed no seq
}

TEST_CASE("routing rule: txtime sends use the ring, plain sends bypass it") {
    auto ring = DescriptorRing::create_in_process(16);
    TsnSocket sock(bench_flow(), 0, &ring);
    SimClock clock;

    std::vector<std::vector<std::uint8_t>> plain_deliveries;
    sock.set_plain_sender([&](const FlowTuple&, std::span<const std::uint8_t> p) {
        plain_deliveries.emplace_back(p.begin(), p.end());
    });

    std::vector<std::uint8_t> a(16, 0xaa), b(16, 0xbb);
    std::uint64_t ring_count = 0, plain_count = 0;
    for (int i = 0; i < 10; ++i) {
        if (i % 2 == 0) {
            sock.send_txtime(a, Instant{1000 + static_cast<std::uint64_t>(i)}, clock);
            ++ring_count;
        } else {
            sock.send_plain(b);
            ++plain_count;
        }
    }
    CHECK(ring.approx_size() == ring_count);
    CHECK(plain_deliveries.size() == plain_count);
    for (auto& p : plain_deliveries) CHECK(p == b);
    // every ring descriptor carries a txtime; the plain path never sees one
    while (auto d = ring.pop()) {
        CHECK(d->txtime.ns != 0);
        CHECK(d->payload == a);
    }
}

TEST_CASE("daemon observes gapless increasing seq when nothing blocks") {
    auto ring = DescriptorRing::create_in_process(64);
    TsnSocket sock(bench_flow(), 0, &ring);
    SimClock clock;
    std::vector<std::uint8_t> payload(8, 3);
    for (int i = 0; i < 50; ++i)
        REQUIRE(sock.send_txtime(payload, Instant{1000}, clock) == SendStatus::Sent);
    std::uint64_t expect = 0;
    while (auto d = ring.pop()) CHECK(d->seq == expect++);
    CHECK(expect == 50);
}

} // TEST_SUITE
