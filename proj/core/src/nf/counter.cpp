#include "flexstate/nf/counter.hpp"

#include "flexstate/error.hpp"

namespace flexstate::nf {

Verdict SyncCounter::handle(Packet& packet) {
  try {
    counter_.add(1);
  } catch (const Error& e) {
    if (e.code() == Errc::StoreUnavailable) return Verdict::Drop;
    throw;
  }
  packet.reflect();
  return Verdict::Forward;
}

Verdict AsyncCounter::handle(Packet& packet) {
  try {
    counter_.add_nowait(1);
  } catch (const Error& e) {
    if (e.code() == Errc::Backpressure) return Verdict::Drop;
    throw;
  }
  packet.reflect();
  return Verdict::Forward;
}

}  // namespace flexstate::nf
