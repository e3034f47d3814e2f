#pragma once

#include "ktsn/clock.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ktsn {

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;

    std::string str() const { return host + ":" + std::to_string(port); }
    auto operator<=>(const Endpoint&) const = default;
};

class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

/// Datagram carrier for tunnel traffic. Handlers receive the raw datagram
/// bytes and an arrival instant.
class DatagramTransport {
public:
    virtual ~DatagramTransport() = default;
    virtual void send(const Endpoint& to, std::span<const std::uint8_t> bytes) = 0;
};

using DatagramHandler = std::function<void(std::vector<std::uint8_t>&&, Instant)>;

/// Real OS UDP socket transport; the receiver runs on its own thread and
/// hands datagrams to the registered handler.
class UdpTransport final : public DatagramTransport {
public:
    explicit UdpTransport(Clock& clock, std::uint16_t bind_port = 0);
    ~UdpTransport() override;

    UdpTransport(const UdpTransport&) = delete;
    UdpTransport& operator=(const UdpTransport&) = delete;

    std::uint16_t local_port() const { return local_port_; }
    void send(const Endpoint& to, std::span<const std::uint8_t> bytes) override;
    void start_receiver(DatagramHandler handler);
    void stop();

private:
    Clock& clock_;
    int fd_ = -1;
    std::uint16_t local_port_ = 0;
    std::thread rx_thread_;
    std::atomic<bool> stop_{false};
};

/// In-process network of named endpoints with a fixed modeled hop delay.
/// Delivery is synchronous; the arrival instant handed to the handler is
/// send-time + hop_delay, which keeps simulated-clock runs deterministic.
class MemNetwork {
public:
    MemNetwork(Clock& clock, Duration hop_delay) : clock_(clock), hop_delay_(hop_delay) {}

    void bind(const Endpoint& ep, DatagramHandler handler);
    void deliver(const Endpoint& to, std::span<const std::uint8_t> bytes);

    class Port final : public DatagramTransport {
    public:
        explicit Port(MemNetwork& net) : net_(net) {}
        void send(const Endpoint& to, std::span<const std::uint8_t> bytes) override {
            net_.deliver(to, bytes);
        }

    private:
        MemNetwork& net_;
    };

    Port port() { return Port{*this}; }

private:
    Clock& clock_;
    Duration hop_delay_;
    std::mutex mu_;
    std::map<Endpoint, DatagramHandler> handlers_;
};

} // namespace ktsn
