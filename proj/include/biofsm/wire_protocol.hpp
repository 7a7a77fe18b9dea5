#pragma once

// One-byte arousal messages between the wearable and benchtop nodes.
//
//   NORMAL -> 'A' (0x41)   MILD -> 'B' (0x42)   HIGH -> 'C' (0x43)
//
// Every received datagram decodes to some InputSymbol; anything other than a
// single 'A'/'B'/'C' octet is UNRECOGNIZED. ABSENT never comes off the wire,
// it is what a tick with no datagram looks like.

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "biofsm/arousal_classifier.hpp"

namespace biofsm {

enum class InputSymbol : std::uint8_t { VALID_A, VALID_B, VALID_C, UNRECOGNIZED, ABSENT };

inline constexpr std::array<InputSymbol, 5> kAllSymbols{InputSymbol::VALID_A, InputSymbol::VALID_B,
                                                        InputSymbol::VALID_C, InputSymbol::UNRECOGNIZED,
                                                        InputSymbol::ABSENT};

std::string_view to_string(InputSymbol s);

// Script token: A, B, C, X (unrecognized), - (absent)
char symbol_token(InputSymbol s);
std::optional<InputSymbol> symbol_from_token(char c);

InputSymbol symbol_for(ArousalClass c);

struct ClassByte {
  std::uint8_t byte = 0;
  bool operator==(const ClassByte&) const = default;
};

ClassByte encode(ArousalClass c);
InputSymbol decode(std::span<const std::uint8_t> payload);

inline constexpr std::uint16_t kDefaultPort = 8888;
inline constexpr std::size_t kMaxDatagram = 65507;

struct EndpointConfig {
  std::string bind_address = "127.0.0.1";
  std::string peer_address = "127.0.0.1";
  std::uint16_t port = kDefaultPort;  // benchtop listens here, wearable sends here

  bool operator==(const EndpointConfig&) const = default;

  void validate() const;
};

// RAII IPv4 UDP socket.
class UdpEndpoint {
 public:
  using Clock = std::chrono::steady_clock;

  // Binds to bind_address:port (port 0 picks an ephemeral port). Throws
  // ConfigError when the address does not parse or the bind fails.
  static UdpEndpoint bind(const std::string& address, std::uint16_t port);
  // Unbound sender aimed at address:port.
  static UdpEndpoint connect_to(const std::string& address, std::uint16_t port);

  UdpEndpoint(UdpEndpoint&& other) noexcept;
  UdpEndpoint& operator=(UdpEndpoint&& other) noexcept;
  UdpEndpoint(const UdpEndpoint&) = delete;
  UdpEndpoint& operator=(const UdpEndpoint&) = delete;
  ~UdpEndpoint();

  std::uint16_t local_port() const;

  // Raw send to the configured peer. False (and nothing thrown) on failure.
  bool send_bytes(std::span<const std::uint8_t> payload);
  bool send_class(ArousalClass c);

  // Waits until `deadline`, draining every datagram that arrives. Returns
  // the decoded newest one (last writer wins), nullopt if none arrived.
  std::optional<InputSymbol> poll_receive(Clock::time_point deadline);

  // Counts datagrams consumed by poll_receive, superseded ones included.
  std::uint64_t datagrams_received() const noexcept { return received_; }

 private:
  explicit UdpEndpoint(int fd) : fd_(fd) {}

  int fd_ = -1;
  bool has_peer_ = false;
  std::uint64_t received_ = 0;
};

}  // namespace biofsm
