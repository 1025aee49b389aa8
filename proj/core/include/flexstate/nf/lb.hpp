#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flexstate/api.hpp"
#include "flexstate/runtime.hpp"

namespace flexstate::nf {

inline constexpr std::string_view kLbFlowsId = "lb_flows";
inline constexpr std::string_view kLbLoadId = "lb_load";

std::vector<std::string> default_servers(std::size_t n = 4);

/// Least-loaded balancer over this core's own load counters. A new flow
/// goes to the server with the lowest load (ties: lowest index) and adds 1
/// to it. Every packet is forwarded; packet.tag carries the server index.
class LoadBalancer final : public PacketHandler {
 public:
  /// Throws EmptyServerList.
  LoadBalancer(StateContext& ctx, std::vector<std::string> servers);
  Verdict handle(Packet& packet) override;

  const std::vector<std::string>& servers() const noexcept { return servers_; }

 private:
  std::uint32_t pick() const;

  std::vector<std::string> servers_;
  Map flows_;
  CounterMap load_;
};

}  // namespace flexstate::nf
