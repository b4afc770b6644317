#include "zkmfa/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "zkmfa/errors.hpp"

namespace zkmfa {

namespace {

// Largest body any message type can carry.
constexpr std::uint32_t kMaxBody = 1u << 20;

[[noreturn]] void fail(const std::string& what) {
    throw TransportError(what + ": " + std::strerror(errno));
}

void set_timeouts(int fd, int timeout_ms) {
    timeval tv{};
    tv.tv_sec = timeout_ms / 1000;
    tv.tv_usec = (timeout_ms % 1000) * 1000;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

}  // namespace

FramedSocket& FramedSocket::operator=(FramedSocket&& o) noexcept {
    if (this != &o) {
        if (fd_ >= 0) {
            ::close(fd_);
        }
        fd_ = o.fd_;
        o.fd_ = -1;
    }
    return *this;
}

FramedSocket::~FramedSocket() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

FramedSocket FramedSocket::connect(const std::string& host, std::uint16_t port, int timeout_ms) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
        throw TransportError("resolve " + host + ": " + ::gai_strerror(rc));
    }
    int fd = -1;
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            continue;
        }
        set_timeouts(fd, timeout_ms);
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            break;
        }
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) {
        fail("connect " + host + ":" + service);
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return FramedSocket(fd);
}

void FramedSocket::write_all(ByteView data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("send");
        }
        off += static_cast<std::size_t>(n);
    }
}

void FramedSocket::read_exact(std::span<std::uint8_t> out) {
    std::size_t off = 0;
    while (off < out.size()) {
        const ssize_t n = ::recv(fd_, out.data() + off, out.size() - off, 0);
        if (n == 0) {
            throw TransportError("connection closed by peer");
        }
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("recv");
        }
        off += static_cast<std::size_t>(n);
    }
}

void FramedSocket::send_frame(ByteView frame) {
    if (fd_ < 0) {
        throw TransportError("send on closed socket");
    }
    write_all(frame);
}

Bytes FramedSocket::receive_frame() {
    if (fd_ < 0) {
        throw TransportError("receive on closed socket");
    }
    Bytes frame(kFrameHeaderSize);
    read_exact(frame);
    std::uint32_t len = 0;
    try {
        len = decode_frame_header(frame).second;
    } catch (const FormatError& e) {
        throw TransportError(std::string("bad frame header: ") + e.what());
    }
    if (len > kMaxBody) {
        throw TransportError("frame body too large: " + std::to_string(len));
    }
    frame.resize(kFrameHeaderSize + len);
    read_exact(std::span<std::uint8_t>(frame).subspan(kFrameHeaderSize));
    return frame;
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) {
        fail("socket");
    }
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        fd_ = -1;
        throw TransportError("listen address must be IPv4 dotted-quad: " + host);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 4) != 0) {
        const int saved = errno;
        ::close(fd_);
        fd_ = -1;
        errno = saved;
        fail("bind/listen " + host + ":" + std::to_string(port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

FramedSocket TcpListener::accept(int timeout_ms) {
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, timeout_ms);
    if (rc == 0) {
        throw TransportError("accept: timed out");
    }
    if (rc < 0) {
        fail("poll");
    }
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) {
        fail("accept");
    }
    set_timeouts(fd, timeout_ms);
    return FramedSocket(fd);
}

}  // namespace zkmfa
