#pragma once

#include <string_view>

#include "flexstate/api.hpp"
#include "flexstate/runtime.hpp"

namespace flexstate::nf {

inline constexpr std::string_view kPacketCounterId = "pktCounter";

/// Counts every packet and waits for the store to acknowledge each
/// increment before forwarding. Drops the packet if the store is gone.
class SyncCounter final : public PacketHandler {
 public:
  explicit SyncCounter(StateContext& ctx) : counter_(ctx.counter(kPacketCounterId)) {}
  Verdict handle(Packet& packet) override;

 private:
  Counter counter_;
};

/// Counts every packet in the local cache; the flusher pushes the total.
class AsyncCounter final : public PacketHandler {
 public:
  explicit AsyncCounter(StateContext& ctx) : counter_(ctx.counter(kPacketCounterId)) {}
  Verdict handle(Packet& packet) override;

 private:
  Counter counter_;
};

}  // namespace flexstate::nf
