#pragma once

#include <netinet/in.h>

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pendubridge::net {

// IPv4 address and port.
class Endpoint {
 public:
  Endpoint() = default;
  explicit Endpoint(const sockaddr_in& addr) : addr_(addr) {}

  // "HOST:PORT"; HOST may be a dotted quad or a resolvable name.
  static Endpoint parse(std::string_view text);

  std::string to_string() const;
  std::uint16_t port() const;
  const sockaddr_in& raw() const { return addr_; }

  bool operator==(const Endpoint& other) const;

 private:
  sockaddr_in addr_{};
};

struct Datagram {
  std::vector<std::uint8_t> bytes;
  Endpoint from;
};

// Blocking UDP socket with timed receive. Move-only; closes on destruction.
class UdpSocket {
 public:
  static UdpSocket bind(const Endpoint& local);

  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;
  ~UdpSocket();

  Endpoint local() const;

  void send_to(std::span<const std::uint8_t> bytes, const Endpoint& to) const;

  // Returns nullopt when nothing arrives within `timeout`. A negative timeout
  // waits indefinitely.
  std::optional<Datagram> receive(std::chrono::nanoseconds timeout) const;

 private:
  explicit UdpSocket(int fd) : fd_(fd) {}
  int fd_ = -1;
};

}  // namespace pendubridge::net
