#include "flexstate/nf/catalog.hpp"

#include "flexstate/error.hpp"
#include "flexstate/nf/counter.hpp"
#include "flexstate/nf/lb.hpp"

namespace flexstate::nf {

std::string_view nf_name(NfKind kind) noexcept {
  switch (kind) {
    case NfKind::CounterSync: return "counter-sync";
    case NfKind::CounterAsync: return "counter-async";
    case NfKind::Nat: return "nat";
    case NfKind::LoadBalancer: return "lb";
  }
  return "?";
}

NfKind parse_nf(std::string_view name) {
  for (auto k : {NfKind::CounterSync, NfKind::CounterAsync, NfKind::Nat, NfKind::LoadBalancer}) {
    if (nf_name(k) == name) return k;
  }
  throw Error(Errc::InvalidArgument, "unknown NF '" + std::string(name) + "'");
}

HandlerFactory make_handler_factory(const NfParams& params, std::uint32_t n_cores) {
  switch (params.kind) {
    case NfKind::CounterSync:
      return [](StateContext& ctx) { return std::make_unique<SyncCounter>(ctx); };
    case NfKind::CounterAsync:
      return [](StateContext& ctx) { return std::make_unique<AsyncCounter>(ctx); };
    case NfKind::Nat: {
      params.nat_pool.validate();
      return [pool = params.nat_pool, n_cores](StateContext& ctx) {
        return std::make_unique<Nat>(ctx, pool, n_cores);
      };
    }
    case NfKind::LoadBalancer: {
      auto servers = params.servers.empty() ? default_servers() : params.servers;
      return [servers](StateContext& ctx) { return std::make_unique<LoadBalancer>(ctx, servers); };
    }
  }
  throw Error(Errc::InvalidArgument, "unknown NF kind");
}

}  // namespace flexstate::nf
