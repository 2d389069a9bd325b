#include "csrflab/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <utility>

#include "csrflab/errors.hpp"

namespace csrflab {
namespace {

constexpr int kIoTimeoutMs = 5000;
constexpr std::size_t kMaxMessage = 1 << 20;

class Socket {
public:
    explicit Socket(int fd = -1) : fd_(fd) {}
    ~Socket() { reset(); }
    Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Socket& operator=(Socket&& other) noexcept {
        if (this != &other) {
            reset();
            fd_ = std::exchange(other.fd_, -1);
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int get() const { return fd_; }
    int release() { return std::exchange(fd_, -1); }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_;
};

std::string errno_text(std::string_view what) {
    return std::string(what) + ": " + std::strerror(errno);
}

void set_timeouts(int fd) {
    timeval tv{kIoTimeoutMs / 1000, 0};
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

bool write_all(int fd, std::string_view data) {
    while (!data.empty()) {
        auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

// Reads until one complete message is buffered or the peer closes.
Bytes read_message(int fd) {
    Bytes buffer;
    char chunk[4096];
    while (buffer.size() < kMaxMessage) {
        try {
            if (complete_message_length(buffer)) break;
        } catch (const MalformedMessage&) {
            break;  // let the parser report it
        }
        auto n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
    return buffer;
}

Socket connect_to(const std::string& address, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    auto service = std::to_string(port);
    if (int rc = ::getaddrinfo(address.c_str(), service.c_str(), &hints, &found); rc != 0) {
        throw ConnectionFailed("cannot resolve '" + address + "': " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, &::freeaddrinfo);
    for (auto* ai = found; ai; ai = ai->ai_next) {
        Socket sock(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
        if (sock.get() < 0) continue;
        set_timeouts(sock.get());
        if (::connect(sock.get(), ai->ai_addr, ai->ai_addrlen) == 0) return sock;
    }
    throw ConnectionFailed(errno_text("connect to " + address + ":" + service));
}

}  // namespace

void TcpTransport::add_route(std::string authority, Endpoint endpoint) {
    routes_[std::move(authority)] = std::move(endpoint);
}

Bytes TcpTransport::round_trip(const RequestUri& target, std::string_view request) {
    if (!target.is_http()) throw ConnectionFailed("no network route for '" + to_string(target) + "'");
    Endpoint endpoint{target.host, target.port};
    if (auto it = routes_.find(target.authority()); it != routes_.end()) endpoint = it->second;

    auto sock = connect_to(endpoint.address, endpoint.port);
    if (!write_all(sock.get(), request)) throw ConnectionFailed(errno_text("send"));
    ::shutdown(sock.get(), SHUT_WR);
    auto response = read_message(sock.get());
    if (response.empty()) throw ConnectionFailed("empty response from " + target.authority());
    return response;
}

void InProcessTransport::add_route(std::string authority, Handler handler) {
    routes_[std::move(authority)] = std::move(handler);
}

Bytes InProcessTransport::round_trip(const RequestUri& target, std::string_view request) {
    auto it = routes_.find(target.authority());
    if (!target.is_http() || it == routes_.end()) {
        throw ConnectionFailed("no in-process route for '" + to_string(target) + "'");
    }
    return it->second(request);
}

HttpListener::HttpListener(std::string bind_address, std::uint16_t port, Handler handler)
    : bind_address_(std::move(bind_address)), handler_(std::move(handler)) {
    Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
    if (sock.get() < 0) throw ConnectionFailed(errno_text("socket"));
    int one = 1;
    ::setsockopt(sock.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, bind_address_.c_str(), &addr.sin_addr) != 1) {
        throw ConnectionFailed("bind address must be dotted IPv4: '" + bind_address_ + "'");
    }
    if (::bind(sock.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        throw ConnectionFailed(errno_text("bind " + bind_address_ + ":" + std::to_string(port)));
    }
    if (::listen(sock.get(), 64) != 0) throw ConnectionFailed(errno_text("listen"));

    socklen_t len = sizeof addr;
    ::getsockname(sock.get(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);

    listen_fd_ = sock.release();
    acceptor_ = std::thread([this] { accept_loop(); });
}

HttpListener::~HttpListener() { stop(); }

void HttpListener::stop() {
    if (stopping_.exchange(true)) return;
    if (acceptor_.joinable()) acceptor_.join();
    ::close(listen_fd_);
    listen_fd_ = -1;
    std::vector<std::thread> workers;
    {
        std::scoped_lock lock(workers_mutex_);
        workers.swap(workers_);
    }
    for (auto& w : workers) w.join();
}

void HttpListener::accept_loop() {
    while (!stopping_) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        int ready = ::poll(&pfd, 1, 50);
        if (ready <= 0) continue;
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        std::scoped_lock lock(workers_mutex_);
        workers_.emplace_back([this, fd] { serve_connection(fd); });
    }
}

void HttpListener::serve_connection(int fd) {
    Socket sock(fd);
    set_timeouts(fd);
    auto request = read_message(fd);
    if (request.empty()) return;
    write_all(fd, handler_(request));
    ::shutdown(fd, SHUT_RDWR);
}

}  // namespace csrflab
