#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "csrflab/http.hpp"
#include "csrflab/uri.hpp"

namespace csrflab {

// Moves one serialized request to the host named by `target` and returns
// the raw response bytes. One exchange per call; the connection is closed
// afterwards. Throws ConnectionFailed.
class Transport {
public:
    virtual ~Transport() = default;
    virtual Bytes round_trip(const RequestUri& target, std::string_view request) = 0;
};

struct Endpoint {
    std::string address = "127.0.0.1";
    std::uint16_t port = 0;
};

// Loopback TCP. Virtual lab authorities ("forum.local:8080") are routed to
// real endpoints through an explicit table; anything else is resolved by
// name.
class TcpTransport : public Transport {
public:
    void add_route(std::string authority, Endpoint endpoint);
    Bytes round_trip(const RequestUri& target, std::string_view request) override;

private:
    std::map<std::string, Endpoint, std::less<>> routes_;
};

// Direct function dispatch honouring the same byte-level contract.
class InProcessTransport : public Transport {
public:
    using Handler = std::function<Bytes(std::string_view raw)>;

    void add_route(std::string authority, Handler handler);
    Bytes round_trip(const RequestUri& target, std::string_view request) override;

private:
    std::map<std::string, Handler, std::less<>> routes_;
};

// Minimal blocking HTTP/1.1 listener: one request per connection, each
// connection served on its own thread.
class HttpListener {
public:
    using Handler = std::function<Bytes(std::string_view raw)>;

    // Binds immediately; port 0 picks an ephemeral port. Throws
    // ConnectionFailed when the socket cannot be bound.
    HttpListener(std::string bind_address, std::uint16_t port, Handler handler);
    ~HttpListener();

    HttpListener(const HttpListener&) = delete;
    HttpListener& operator=(const HttpListener&) = delete;

    std::uint16_t port() const { return port_; }
    Endpoint endpoint() const { return {bind_address_, port_}; }

    void stop();

private:
    void accept_loop();
    void serve_connection(int fd);

    std::string bind_address_;
    std::uint16_t port_ = 0;
    Handler handler_;
    int listen_fd_ = -1;
    std::atomic<bool> stopping_{false};
    std::thread acceptor_;
    std::mutex workers_mutex_;
    std::vector<std::thread> workers_;
};

}  // namespace csrflab
