#include "pendubridge/udp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <utility>

#include "pendubridge/errors.hpp"

namespace pendubridge::net {
namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace

Endpoint Endpoint::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    throw ConfigError("expected HOST:PORT, got '" + std::string(text) + "'");
  }
  const std::string host(text.substr(0, colon));
  const std::string_view port_text = text.substr(colon + 1);
  unsigned port = 0;
  const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 65535) {
    throw ConfigError("invalid port in '" + std::string(text) + "'");
  }

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* found = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &found); rc != 0) {
    throw NetworkError("cannot resolve '" + host + "': " + ::gai_strerror(rc));
  }
  sockaddr_in addr{};
  std::memcpy(&addr, found->ai_addr, sizeof(addr));
  ::freeaddrinfo(found);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  return Endpoint(addr);
}

std::string Endpoint::to_string() const {
  char buf[INET_ADDRSTRLEN] = {};
  ::inet_ntop(AF_INET, &addr_.sin_addr, buf, sizeof(buf));
  return std::string(buf) + ":" + std::to_string(port());
}

std::uint16_t Endpoint::port() const { return ntohs(addr_.sin_port); }

bool Endpoint::operator==(const Endpoint& other) const {
  return addr_.sin_addr.s_addr == other.addr_.sin_addr.s_addr &&
         addr_.sin_port == other.addr_.sin_port;
}

UdpSocket UdpSocket::bind(const Endpoint& local) {
  const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw NetworkError(errno_text("socket"));
  UdpSocket sock(fd);
  const sockaddr_in& addr = local.raw();
  if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw NetworkError(errno_text(("bind " + local.to_string()).c_str()));
  }
  return sock;
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

UdpSocket::~UdpSocket() {
  if (fd_ >= 0) ::close(fd_);
}

Endpoint UdpSocket::local() const {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw NetworkError(errno_text("getsockname"));
  }
  return Endpoint(addr);
}

void UdpSocket::send_to(std::span<const std::uint8_t> bytes, const Endpoint& to) const {
  const sockaddr_in& addr = to.raw();
  const auto sent = ::sendto(fd_, bytes.data(), bytes.size(), 0,
                             reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
  if (sent < 0) throw NetworkError(errno_text(("sendto " + to.to_string()).c_str()));
}

std::optional<Datagram> UdpSocket::receive(std::chrono::nanoseconds timeout) const {
  pollfd pfd{fd_, POLLIN, 0};
  timespec ts{};
  timespec* tsp = nullptr;
  if (timeout.count() >= 0) {
    ts.tv_sec = static_cast<time_t>(timeout.count() / 1'000'000'000);
    ts.tv_nsec = static_cast<long>(timeout.count() % 1'000'000'000);
    tsp = &ts;
  }
  for (;;) {
    const int rc = ::ppoll(&pfd, 1, tsp, nullptr);
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw NetworkError(errno_text("ppoll"));
    if (rc == 0) return std::nullopt;
    break;
  }

  Datagram d;
  d.bytes.resize(2048);
  sockaddr_in from{};
  socklen_t len = sizeof(from);
  const auto got = ::recvfrom(fd_, d.bytes.data(), d.bytes.size(), 0,
                              reinterpret_cast<sockaddr*>(&from), &len);
  if (got < 0) {
    // ICMP port-unreachable from an earlier send surfaces here; treat as no data.
    if (errno == ECONNREFUSED || errno == EINTR) return std::nullopt;
    throw NetworkError(errno_text("recvfrom"));
  }
  d.bytes.resize(static_cast<std::size_t>(got));
  d.from = Endpoint(from);
  return d;
}

}  // namespace pendubridge::net
