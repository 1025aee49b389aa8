#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flexstate/nf/nat.hpp"
#include "flexstate/runtime.hpp"

namespace flexstate::nf {

enum class NfKind { CounterSync, CounterAsync, Nat, LoadBalancer };

std::string_view nf_name(NfKind kind) noexcept;
/// "counter-sync", "counter-async", "nat", "lb". Throws InvalidArgument.
NfKind parse_nf(std::string_view name);

struct NfParams {
  NfKind kind = NfKind::CounterAsync;
  NatPool nat_pool;
  std::vector<std::string> servers;  // empty: default_servers()
};

/// Handler factory for a pool of n_cores workers.
HandlerFactory make_handler_factory(const NfParams& params, std::uint32_t n_cores);

}  // namespace flexstate::nf
