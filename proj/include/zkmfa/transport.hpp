#pragma once

#include <cstdint>
#include <string>

#include "zkmfa/protocol.hpp"

namespace zkmfa {

/// Blocking TCP connection carrying whole ZKMF frames. Errors raise TransportError.
class FramedSocket {
public:
    FramedSocket() = default;
    explicit FramedSocket(int fd) noexcept : fd_(fd) {}
    FramedSocket(FramedSocket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
    FramedSocket& operator=(FramedSocket&& o) noexcept;
    FramedSocket(const FramedSocket&) = delete;
    FramedSocket& operator=(const FramedSocket&) = delete;
    ~FramedSocket();

    static FramedSocket connect(const std::string& host, std::uint16_t port, int timeout_ms = 10000);

    void send_frame(ByteView frame);
    /// One complete frame (header + body), header-validated.
    Bytes receive_frame();

    bool valid() const noexcept { return fd_ >= 0; }

private:
    void write_all(ByteView data);
    void read_exact(std::span<std::uint8_t> out);

    int fd_ = -1;
};

class TcpListener {
public:
    /// Port 0 picks an ephemeral port; see port().
    TcpListener(const std::string& host, std::uint16_t port);
    TcpListener(TcpListener&& o) noexcept : fd_(o.fd_), port_(o.port_) { o.fd_ = -1; }
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;
    ~TcpListener();

    std::uint16_t port() const noexcept { return port_; }
    FramedSocket accept(int timeout_ms = 60000);

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace zkmfa
