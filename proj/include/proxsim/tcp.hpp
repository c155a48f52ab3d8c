#pragma once

// Line-oriented TCP transport for the protocol. One thread per connection;
// all of them share the Service, which serializes access itself.

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "proxsim/service.hpp"

namespace proxsim::tcp {

class Server {
public:
    /// Binds immediately. Port 0 picks an ephemeral port (see port()).
    /// Throws IoError when the socket cannot be bound.
    Server(service::Service& svc, std::uint16_t port, const std::string& host = "127.0.0.1");
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    std::uint16_t port() const { return port_; }

    /// Start accepting in a background thread.
    void start();
    /// Close the listener, stop reading from every connection (responses
    /// being written still go out), then join all threads. Idempotent.
    void stop();

private:
    void accept_loop();
    void serve(int fd);

    service::Service& svc_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> running_{false};
    std::thread acceptor_;
    std::mutex mu_;
    std::vector<int> client_fds_;
    std::vector<std::thread> workers_;
};

class Client {
public:
    /// Throws IoError when the connection fails.
    Client(const std::string& host, std::uint16_t port);
    ~Client();

    Client(const Client&) = delete;
    Client& operator=(const Client&) = delete;

    /// Send one line and wait for the response line. Throws IoError when
    /// the connection drops.
    std::string request(const std::string& line);

private:
    int fd_ = -1;
    std::string buffer_;
};

} // namespace proxsim::tcp
