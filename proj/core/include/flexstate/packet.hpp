#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>

namespace flexstate {

/// The 5-tuple identifying a flow. Direction-sensitive: no normalisation.
struct FlowKey {
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t proto = 0;

  friend bool operator==(const FlowKey&, const FlowKey&) = default;
  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;

  /// Canonical 13-byte big-endian encoding (src ip, dst ip, src port, dst port, proto).
  std::array<std::uint8_t, 13> bytes() const noexcept;
  /// Same encoding as a Blob-compatible string, usable as a state key.
  std::string encode() const;
  static FlowKey decode(std::string_view bytes);
};

inline constexpr std::uint32_t kMinPacketSize = 54;  // Ethernet 14 + IPv4 20 + TCP 20
inline constexpr std::uint32_t kDefaultPacketSize = 64;

/// A synthetic packet record; size is carried as metadata only.
struct Packet {
  FlowKey flow;
  std::uint32_t size = kDefaultPacketSize;
  /// NF annotation, e.g. the server chosen by the load balancer.
  std::uint32_t tag = 0;

  /// MAC-swap emulation: swap source and destination.
  void reflect() noexcept;
};

std::string format_ipv4(std::uint32_t addr);
std::uint32_t parse_ipv4(std::string_view text);

struct FlowKeyHash {
  std::size_t operator()(const FlowKey& k) const noexcept;
};

}  // namespace flexstate
