#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "flexstate/api.hpp"
#include "flexstate/packet.hpp"
#include "flexstate/runtime.hpp"

namespace flexstate::nf {

inline constexpr std::string_view kNatBindingsId = "nat_bindings";
inline constexpr std::string_view kNatCursorId = "nat_cursor";

struct ExternalPair {
  std::uint32_t ip = 0;
  std::uint16_t port = 0;

  friend bool operator==(const ExternalPair&, const ExternalPair&) = default;
  friend auto operator<=>(const ExternalPair&, const ExternalPair&) = default;

  /// 6 bytes, big endian: ip then port.
  std::string encode() const;
  static ExternalPair decode(std::string_view bytes);
};

/// The global ordered pool of (ip, port) pairs. Pair i uses address
/// first_ip + i / ports_per_ip and port first_port + i % ports_per_ip.
struct NatPool {
  std::uint32_t first_ip = 0x0A000001;  // 10.0.0.1
  std::uint16_t first_port = 1024;
  std::uint32_t ports_per_ip = 64512;
  std::uint64_t size = 65536;

  void validate() const;
  ExternalPair pair(std::uint64_t index) const;
  /// Index of a pair in the pool, or nullopt if it is not part of it.
  std::optional<std::uint64_t> index_of(const ExternalPair& p) const;
};

/// Contiguous slice [begin, end) of the pool owned by one core.
struct NatChunk {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  std::uint64_t size() const noexcept { return end - begin; }
  bool contains(std::uint64_t index) const noexcept { return index >= begin && index < end; }
  friend bool operator==(const NatChunk&, const NatChunk&) = default;
};

NatChunk chunk_for(const NatPool& pool, std::uint32_t core, std::uint32_t n_cores);

/// Source NAT. Each new flow takes the next free pair of the core's chunk
/// (lowest index first); later packets of the flow reuse the binding.
class Nat final : public PacketHandler {
 public:
  Nat(StateContext& ctx, const NatPool& pool, std::uint32_t n_cores);
  Verdict handle(Packet& packet) override;

  const NatChunk& chunk() const noexcept { return chunk_; }
  std::uint64_t exhausted() const noexcept { return exhausted_; }

 private:
  NatPool pool_;
  NatChunk chunk_;
  Map bindings_;
  Counter cursor_;
  std::uint64_t exhausted_ = 0;
};

}  // namespace flexstate::nf
