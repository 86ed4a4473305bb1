#include "polyrpc/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "polyrpc/errors.hpp"

namespace polyrpc {

namespace {

// ---------------------------------------------------------------- in-memory

struct Channel {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<std::string> queue;
    bool closed = false;
};

class MemoryEndpoint final : public Endpoint {
public:
    MemoryEndpoint(std::shared_ptr<Channel> out, std::shared_ptr<Channel> in)
        : out_(std::move(out)), in_(std::move(in)) {}

    ~MemoryEndpoint() override { close(); }

    bool send(std::string_view frame) override {
        if (frame.size() > kMaxFrameBytes) return false;
        std::lock_guard lock(out_->mutex);
        if (out_->closed) return false;
        out_->queue.emplace_back(frame);
        out_->cv.notify_one();
        return true;
    }

    std::optional<std::string> recv(std::optional<std::chrono::milliseconds> timeout) override {
        std::unique_lock lock(in_->mutex);
        auto ready = [&] { return !in_->queue.empty() || in_->closed; };
        if (timeout) {
            if (!in_->cv.wait_for(lock, *timeout, ready)) return std::nullopt;
        } else {
            in_->cv.wait(lock, ready);
        }
        if (in_->queue.empty()) return std::nullopt;  // closed
        std::string frame = std::move(in_->queue.front());
        in_->queue.pop_front();
        return frame;
    }

    void close() override {
        for (auto& ch : {out_, in_}) {
            std::lock_guard lock(ch->mutex);
            ch->closed = true;
            ch->cv.notify_all();
        }
    }

    bool closed() const override {
        std::lock_guard lock(in_->mutex);
        return in_->closed && in_->queue.empty();
    }

private:
    std::shared_ptr<Channel> out_;
    std::shared_ptr<Channel> in_;
};

// --------------------------------------------------------------------- TCP

class TcpEndpoint final : public Endpoint {
public:
    explicit TcpEndpoint(int fd) : fd_(fd) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }

    ~TcpEndpoint() override { close(); }

    bool send(std::string_view frame) override {
        if (frame.size() > kMaxFrameBytes) return false;
        std::lock_guard lock(send_mutex_);
        if (closed_) return false;
        std::uint32_t len = htonl(static_cast<std::uint32_t>(frame.size()));
        return write_all(reinterpret_cast<const char*>(&len), sizeof(len)) &&
               write_all(frame.data(), frame.size());
    }

    std::optional<std::string> recv(std::optional<std::chrono::milliseconds> timeout) override {
        std::uint32_t len_be = 0;
        if (!read_all(reinterpret_cast<char*>(&len_be), sizeof(len_be), timeout))
            return std::nullopt;
        std::size_t len = ntohl(len_be);
        if (len > kMaxFrameBytes) {
            close();
            return std::nullopt;
        }
        std::string frame(len, '\0');
        if (!read_all(frame.data(), len, timeout)) return std::nullopt;
        return frame;
    }

    void close() override {
        bool expected = false;
        if (closed_.compare_exchange_strong(expected, true)) {
            ::shutdown(fd_, SHUT_RDWR);
            ::close(fd_);
        }
    }

    bool closed() const override { return closed_.load(); }

private:
    bool write_all(const char* data, std::size_t size) {
        while (size > 0) {
            ssize_t n = ::send(fd_, data, size, MSG_NOSIGNAL);
            if (n <= 0) return false;
            data += n;
            size -= static_cast<std::size_t>(n);
        }
        return true;
    }

    bool read_all(char* data, std::size_t size,
                  std::optional<std::chrono::milliseconds> timeout) {
        while (size > 0) {
            if (timeout) {
                pollfd pfd{fd_, POLLIN, 0};
                int rc = ::poll(&pfd, 1, static_cast<int>(timeout->count()));
                if (rc <= 0) return false;
            }
            ssize_t n = ::recv(fd_, data, size, 0);
            if (n <= 0) return false;
            data += n;
            size -= static_cast<std::size_t>(n);
        }
        return true;
    }

    int fd_;
    std::mutex send_mutex_;
    std::atomic<bool> closed_{false};
};

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw Error(ErrorCode::Unreachable, "bad IPv4 address '" + host + "'");
    }
    return addr;
}

}  // namespace

std::pair<std::shared_ptr<Endpoint>, std::shared_ptr<Endpoint>> in_memory_pair() {
    auto a_to_b = std::make_shared<Channel>();
    auto b_to_a = std::make_shared<Channel>();
    return {std::make_shared<MemoryEndpoint>(a_to_b, b_to_a),
            std::make_shared<MemoryEndpoint>(b_to_a, a_to_b)};
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw Error(ErrorCode::Unreachable, "socket() failed");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = make_addr(host, port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(fd_, 16) != 0) {
        ::close(fd_);
        throw Error(ErrorCode::Unreachable,
                    "cannot listen on " + host + ":" + std::to_string(port));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { close(); }

std::shared_ptr<Endpoint> TcpListener::accept() {
    int client = ::accept(fd_, nullptr, nullptr);
    if (client < 0) return nullptr;
    return std::make_shared<TcpEndpoint>(client);
}

void TcpListener::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

std::shared_ptr<Endpoint> tcp_connect(const std::string& host, std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error(ErrorCode::Unreachable, "socket() failed");
    sockaddr_in addr = make_addr(host, port);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw Error(ErrorCode::Unreachable,
                    "cannot connect to " + host + ":" + std::to_string(port));
    }
    return std::make_shared<TcpEndpoint>(fd);
}

}  // namespace polyrpc
