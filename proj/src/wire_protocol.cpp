#include "biofsm/wire_protocol.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <utility>
#include <vector>

#include "biofsm/errors.hpp"

namespace biofsm {

std::string_view to_string(InputSymbol s) {
  switch (s) {
    case InputSymbol::VALID_A: return "VALID_A";
    case InputSymbol::VALID_B: return "VALID_B";
    case InputSymbol::VALID_C: return "VALID_C";
    case InputSymbol::UNRECOGNIZED: return "UNRECOGNIZED";
    case InputSymbol::ABSENT: return "ABSENT";
  }
  return "?";
}

char symbol_token(InputSymbol s) {
  switch (s) {
    case InputSymbol::VALID_A: return 'A';
    case InputSymbol::VALID_B: return 'B';
    case InputSymbol::VALID_C: return 'C';
    case InputSymbol::UNRECOGNIZED: return 'X';
    case InputSymbol::ABSENT: return '-';
  }
  return '?';
}

std::optional<InputSymbol> symbol_from_token(char c) {
  switch (c) {
    case 'A': return InputSymbol::VALID_A;
    case 'B': return InputSymbol::VALID_B;
    case 'C': return InputSymbol::VALID_C;
    case 'X': return InputSymbol::UNRECOGNIZED;
    case '-': return InputSymbol::ABSENT;
    default: return std::nullopt;
  }
}

InputSymbol symbol_for(ArousalClass c) {
  switch (c) {
    case ArousalClass::NORMAL: return InputSymbol::VALID_A;
    case ArousalClass::MILD: return InputSymbol::VALID_B;
    case ArousalClass::HIGH: return InputSymbol::VALID_C;
  }
  return InputSymbol::UNRECOGNIZED;
}

ClassByte encode(ArousalClass c) {
  return ClassByte{static_cast<std::uint8_t>('A' + static_cast<std::uint8_t>(c))};
}

InputSymbol decode(std::span<const std::uint8_t> payload) {
  if (payload.size() != 1) return InputSymbol::UNRECOGNIZED;
  switch (payload[0]) {
    case 0x41: return InputSymbol::VALID_A;
    case 0x42: return InputSymbol::VALID_B;
    case 0x43: return InputSymbol::VALID_C;
    default: return InputSymbol::UNRECOGNIZED;
  }
}

// ---------------------------------------------------------------------------

namespace {

sockaddr_in make_addr(const std::string& address, std::uint16_t port) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  if (address == "localhost") {
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  } else if (::inet_pton(AF_INET, address.c_str(), &sa.sin_addr) != 1) {
    throw ConfigError("not an IPv4 address: '" + address + "'");
  }
  return sa;
}

int open_socket() {
  const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw ConfigError(std::string("socket(): ") + std::strerror(errno));
  return fd;
}

}  // namespace

void EndpointConfig::validate() const {
  if (port == 0) throw ConfigError("port must be in 1-65535");
  make_addr(bind_address, port);
  make_addr(peer_address, port);
}

UdpEndpoint UdpEndpoint::bind(const std::string& address, std::uint16_t port) {
  const sockaddr_in sa = make_addr(address, port);
  UdpEndpoint ep(open_socket());
  if (::bind(ep.fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0) {
    throw ConfigError("cannot bind " + address + ":" + std::to_string(port) + ": " + std::strerror(errno));
  }
  return ep;
}

UdpEndpoint UdpEndpoint::connect_to(const std::string& address, std::uint16_t port) {
  const sockaddr_in sa = make_addr(address, port);
  UdpEndpoint ep(open_socket());
  if (::connect(ep.fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0) {
    throw ConfigError("cannot set UDP peer " + address + ":" + std::to_string(port) + ": " +
                      std::strerror(errno));
  }
  ep.has_peer_ = true;
  return ep;
}

UdpEndpoint::UdpEndpoint(UdpEndpoint&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)),
      has_peer_(other.has_peer_),
      received_(other.received_) {}

UdpEndpoint& UdpEndpoint::operator=(UdpEndpoint&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
    has_peer_ = other.has_peer_;
    received_ = other.received_;
  }
  return *this;
}

UdpEndpoint::~UdpEndpoint() {
  if (fd_ >= 0) ::close(fd_);
}

std::uint16_t UdpEndpoint::local_port() const {
  sockaddr_in sa{};
  socklen_t len = sizeof sa;
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len) != 0) return 0;
  return ntohs(sa.sin_port);
}

bool UdpEndpoint::send_bytes(std::span<const std::uint8_t> payload) {
  if (!has_peer_) return false;
  const ssize_t n = ::send(fd_, payload.data(), payload.size(), 0);
  return n == static_cast<ssize_t>(payload.size());
}

bool UdpEndpoint::send_class(ArousalClass c) {
  const std::array<std::uint8_t, 1> payload{encode(c).byte};
  return send_bytes(payload);
}

std::optional<InputSymbol> UdpEndpoint::poll_receive(Clock::time_point deadline) {
  std::vector<std::uint8_t> buf(kMaxDatagram);
  std::optional<InputSymbol> newest;
  for (;;) {
    const auto now = Clock::now();
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    pollfd pfd{fd_, POLLIN, 0};
    // round up so we never spin on a sub-millisecond remainder
    int timeout = now >= deadline ? 0 : static_cast<int>(remaining.count()) + 1;
    const int rc = ::poll(&pfd, 1, timeout);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc > 0 && (pfd.revents & POLLIN)) {
      // drain everything already queued
      for (;;) {
        const ssize_t n = ::recv(fd_, buf.data(), buf.size(), MSG_DONTWAIT);
        if (n < 0) break;
        ++received_;
        newest = decode(std::span(buf.data(), static_cast<std::size_t>(n)));
      }
    }
    if (Clock::now() >= deadline) break;
  }
  return newest;
}

}  // namespace biofsm
