#include "proxsim/tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "proxsim/error.hpp"
#include "proxsim/protocol.hpp"

namespace proxsim::tcp {
namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

bool send_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

// Reads until a full line is buffered. Returns false on EOF or error.
bool read_line(int fd, std::string& buffer, std::string& line) {
    for (;;) {
        const auto nl = buffer.find('\n');
        if (nl != std::string::npos) {
            line.assign(buffer, 0, nl);
            buffer.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
        }
        char chunk[4096];
        const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

} // namespace

Server::Server(service::Service& svc, std::uint16_t port, const std::string& host) : svc_(svc) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw IoError(errno_text("socket"));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw IoError("invalid IPv4 address '" + host + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
        ::listen(listen_fd_, 64) < 0) {
        const auto msg = errno_text("bind");
        ::close(listen_fd_);
        throw IoError(msg);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

Server::~Server() { stop(); }

void Server::start() {
    if (running_.exchange(true)) return;
    acceptor_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
    const bool was_running = running_.exchange(false);
    if (listen_fd_ >= 0) {
        // shutdown() wakes a blocked accept(); close() alone does not on Linux.
        ::shutdown(listen_fd_, SHUT_RDWR);
    }
    if (was_running && acceptor_.joinable()) acceptor_.join();
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(mu_);
        // Read side only: a worker finishes the response it is writing,
        // then sees EOF and closes.
        for (int fd : client_fds_) ::shutdown(fd, SHUT_RD);
        workers.swap(workers_);
    }
    for (auto& t : workers) t.join();
}

void Server::accept_loop() {
    while (running_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break;
        }
        set_nodelay(fd);
        std::lock_guard lock(mu_);
        if (!running_) {
            ::close(fd);
            break;
        }
        client_fds_.push_back(fd);
        workers_.emplace_back([this, fd] { serve(fd); });
    }
}

void Server::serve(int fd) {
    protocol::Connection conn(svc_);
    std::string buffer, line;
    while (read_line(fd, buffer, line)) {
        if (line.empty()) continue;
        if (!send_all(fd, conn.handle_line(line) + "\n")) break;
    }
    std::lock_guard lock(mu_);
    client_fds_.erase(std::remove(client_fds_.begin(), client_fds_.end(), fd), client_fds_.end());
    ::close(fd);
}

Client::Client(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const auto service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
        throw IoError("resolve " + host + ": " + ::gai_strerror(rc));
    }
    for (auto* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd_ < 0) continue;
        if (::connect(fd_, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd_);
        fd_ = -1;
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) throw IoError("cannot connect to " + host + ":" + service);
    set_nodelay(fd_);
}

Client::~Client() {
    if (fd_ >= 0) ::close(fd_);
}

std::string Client::request(const std::string& line) {
    if (!send_all(fd_, line + "\n")) throw IoError(errno_text("send"));
    std::string out;
    if (!read_line(fd_, buffer_, out)) throw IoError("connection closed");
    return out;
}

} // namespace proxsim::tcp
