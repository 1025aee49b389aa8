#include "flexstate/nf/nat.hpp"

#include "flexstate/error.hpp"

namespace flexstate::nf {

std::string ExternalPair::encode() const {
  return {static_cast<char>(ip >> 24), static_cast<char>(ip >> 16), static_cast<char>(ip >> 8),
          static_cast<char>(ip),       static_cast<char>(port >> 8), static_cast<char>(port)};
}

ExternalPair ExternalPair::decode(std::string_view b) {
  if (b.size() != 6) throw Error(Errc::ParseError, "external pair encoding must be 6 bytes");
  auto u = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])); };
  return {u(0) << 24 | u(1) << 16 | u(2) << 8 | u(3), static_cast<std::uint16_t>(u(4) << 8 | u(5))};
}

void NatPool::validate() const {
  if (size == 0) throw Error(Errc::InvalidArgument, "NAT pool is empty");
  if (ports_per_ip == 0 || first_port + std::uint64_t{ports_per_ip} > 65536) {
    throw Error(Errc::InvalidArgument, "NAT port range does not fit in 16 bits");
  }
  const std::uint64_t n_ips = (size + ports_per_ip - 1) / ports_per_ip;
  if (first_ip + n_ips - 1 > 0xFFFFFFFFull) throw Error(Errc::InvalidArgument, "NAT address range overflows");
}

ExternalPair NatPool::pair(std::uint64_t index) const {
  if (index >= size) throw Error(Errc::PoolExhausted, "pool index " + std::to_string(index) + " out of range");
  return {static_cast<std::uint32_t>(first_ip + index / ports_per_ip),
          static_cast<std::uint16_t>(first_port + index % ports_per_ip)};
}

std::optional<std::uint64_t> NatPool::index_of(const ExternalPair& p) const {
  if (p.ip < first_ip || p.port < first_port || std::uint32_t{p.port} - first_port >= ports_per_ip) return std::nullopt;
  const std::uint64_t i = std::uint64_t{p.ip - first_ip} * ports_per_ip + (p.port - first_port);
  if (i >= size) return std::nullopt;
  return i;
}

NatChunk chunk_for(const NatPool& pool, std::uint32_t core, std::uint32_t n_cores) {
  if (n_cores == 0 || core >= n_cores) throw Error(Errc::InvalidArgument, "core outside the pool");
  return {pool.size * core / n_cores, pool.size * (core + 1) / n_cores};
}

Nat::Nat(StateContext& ctx, const NatPool& pool, std::uint32_t n_cores)
    : pool_(pool),
      chunk_(chunk_for(pool, ctx.core_id(), n_cores)),
      bindings_(ctx.map(kNatBindingsId)),
      cursor_(ctx.counter(kNatCursorId)) {
  pool_.validate();
}

Verdict Nat::handle(Packet& packet) {
  const std::string key = packet.flow.encode();
  ExternalPair ext;
  if (auto bound = bindings_.get(key)) {
    ext = ExternalPair::decode(*bound);
  } else {
    const auto used = static_cast<std::uint64_t>(cursor_.read());
    if (used >= chunk_.size()) {
      ++exhausted_;
      return Verdict::Drop;
    }
    ext = pool_.pair(chunk_.begin + used);
    bindings_.insert_nowait(key, ext.encode());
    cursor_.add_nowait(1);
  }
  packet.flow.src_ip = ext.ip;
  packet.flow.src_port = ext.port;
  return Verdict::Forward;
}

}  // namespace flexstate::nf
