#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace polyrpc {

/// Hard cap on one framed message.
inline constexpr std::size_t kMaxFrameBytes = 16u * 1024u * 1024u;

/// A bidirectional, ordered, lossless frame channel between two spaces.
class Endpoint {
public:
    virtual ~Endpoint() = default;

    /// False once the channel is closed.
    virtual bool send(std::string_view frame) = 0;

    /// Blocks for the next frame; nullopt on close or timeout.
    virtual std::optional<std::string> recv(
        std::optional<std::chrono::milliseconds> timeout = std::nullopt) = 0;

    virtual void close() = 0;
    virtual bool closed() const = 0;
};

/// Deterministic FIFO channel for in-process spaces; no loss, no reordering.
std::pair<std::shared_ptr<Endpoint>, std::shared_ptr<Endpoint>> in_memory_pair();

/// TCP framing is bit-exact: 4-byte big-endian length, then that many bytes
/// of UTF-8 JSON. Frames beyond kMaxFrameBytes are refused.
class TcpListener {
public:
    explicit TcpListener(const std::string& host, std::uint16_t port);
    ~TcpListener();

    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }
    /// Blocks for one inbound connection; nullptr once closed.
    std::shared_ptr<Endpoint> accept();
    void close();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

std::shared_ptr<Endpoint> tcp_connect(const std::string& host, std::uint16_t port);

}  // namespace polyrpc
