#include "ktsn/transport.hpp"

#include <cerrno>
#include <cstring>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace ktsn {

UdpTransport::UdpTransport(Clock& clock, std::uint16_t bind_port) : clock_(clock) {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(bind_port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int err = errno;
        ::close(fd_);
        fd_ = -1;
        throw TransportError(std::string("bind: ") + std::strerror(err));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    local_port_ = ntohs(addr.sin_port);

    timeval tv{0, 50000}; // receiver wakes every 50 ms to check the stop flag
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

UdpTransport::~UdpTransport() {
    stop();
    if (fd_ >= 0) ::close(fd_);
}

void UdpTransport::send(const Endpoint& to, std::span<const std::uint8_t> bytes) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(to.port);
    if (::inet_pton(AF_INET, to.host.c_str(), &addr.sin_addr) != 1)
        throw TransportError("invalid endpoint host: " + to.host);
    ssize_t n = ::sendto(fd_, bytes.data(), bytes.size(), 0,
                         reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    if (n < 0 || static_cast<std::size_t>(n) != bytes.size())
        throw TransportError("sendto " + to.str() + ": " + std::strerror(errno));
}

void UdpTransport::start_receiver(DatagramHandler handler) {
    stop_.store(false);
    rx_thread_ = std::thread([this, handler = std::move(handler)] {
        std::vector<std::uint8_t> buf(65536);
        while (!stop_.load(std::memory_order_acquire)) {
            ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
            if (n <= 0) continue; // timeout or transient error
            handler(std::vector<std::uint8_t>(buf.begin(), buf.begin() + n), clock_.now());
        }
    });
}

void UdpTransport::stop() {
    stop_.store(true, std::memory_order_release);
    if (rx_thread_.joinable()) rx_thread_.join();
}

void MemNetwork::bind(const Endpoint& ep, DatagramHandler handler) {
    std::lock_guard lk(mu_);
    handlers_[ep] = std::move(handler);
}

void MemNetwork::deliver(const Endpoint& to, std::span<const std::uint8_t> bytes) {
    DatagramHandler handler;
    {
        std::lock_guard lk(mu_);
        auto it = handlers_.find(to);
        if (it == handlers_.end())
            throw TransportError("no endpoint bound at " + to.str());
        handler = it->second;
    }
    Instant arrival = clock_.now() + hop_delay_;
    handler(std::vector<std::uint8_t>(bytes.begin(), bytes.end()), arrival);
}

} // namespace ktsn
