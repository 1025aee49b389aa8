#include "flexstate/nf/lb.hpp"

#include <charconv>

#include "flexstate/error.hpp"

namespace flexstate::nf {

std::vector<std::string> default_servers(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("server" + std::to_string(i));
  return out;
}

LoadBalancer::LoadBalancer(StateContext& ctx, std::vector<std::string> servers)
    : servers_(std::move(servers)) {
  if (servers_.empty()) throw Error(Errc::EmptyServerList, "load balancer needs at least one server");
  flows_ = ctx.map(kLbFlowsId);
  load_ = ctx.counter_map(kLbLoadId);
}

std::uint32_t LoadBalancer::pick() const {
  std::uint32_t best = 0;
  std::int64_t best_load = load_.get(servers_[0]).value_or(0);
  for (std::uint32_t i = 1; i < servers_.size(); ++i) {
    const auto l = load_.get(servers_[i]).value_or(0);
    if (l < best_load) {
      best = i;
      best_load = l;
    }
  }
  return best;
}

Verdict LoadBalancer::handle(Packet& packet) {
  const std::string key = packet.flow.encode();
  std::uint32_t server = 0;
  if (auto assigned = flows_.get(key)) {
    std::from_chars(assigned->data(), assigned->data() + assigned->size(), server);
  } else {
    server = pick();
    flows_.insert_nowait(key, std::to_string(server));
    load_.add_to_nowait(servers_[server], 1);
  }
  packet.tag = server;
  return Verdict::Forward;
}

}  // namespace flexstate::nf
