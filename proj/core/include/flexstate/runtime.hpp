#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "flexstate/api.hpp"
#include "flexstate/cache.hpp"
#include "flexstate/packet.hpp"
#include "flexstate/store.hpp"

namespace flexstate {

/// Software RSS: a well-mixed hash of the canonical 5-tuple encoding,
/// reduced modulo the core count. Deterministic across runs and hosts.
std::uint64_t flow_hash(const FlowKey& flow) noexcept;
std::uint32_t rss_hash(const FlowKey& flow, std::uint32_t n_cores) noexcept;

enum class Verdict { Forward, Drop };

/// Per-core packet-processing logic. Constructed on its worker thread with
/// that core's StateContext; handle() runs only on that worker.
class PacketHandler {
 public:
  virtual ~PacketHandler() = default;
  virtual Verdict handle(Packet& packet) = 0;
  /// Runs on the worker after its last packet, before the cache drains.
  virtual void finish() {}
};

using HandlerFactory = std::function<std::unique_ptr<PacketHandler>(StateContext&)>;

/// Observes every processed packet on its worker thread: the core, the
/// packet's flow as received, the packet as emitted, and the verdict.
using EgressHook = std::function<void(std::uint32_t core, const FlowKey& received,
                                      const Packet& emitted, Verdict verdict)>;

class PacketSource {
 public:
  virtual ~PacketSource() = default;
  /// Fills `out` and returns true, or returns false when exhausted.
  virtual bool next(Packet& out) = 0;
};

enum class OverflowPolicy {
  Drop,   // full queue: drop and count
  Block,  // full queue: the dispatcher waits for room (lossless)
};

struct PoolOptions {
  std::uint32_t cores = 1;
  std::size_t queue_capacity = 64 * 1024;
  OverflowPolicy overflow = OverflowPolicy::Drop;
  std::string nf_id = "nf1";
  std::string instance_id = "ins1";
  CacheOptions cache;
  /// Keep the set of flows each core processed (flow-affinity checks).
  bool record_flows = false;
};

struct CoreReport {
  std::uint32_t core = 0;
  std::uint64_t processed = 0;
  std::uint64_t dropped = 0;
  std::uint64_t nf_drops = 0;
  std::uint64_t distinct_flows = 0;
  FlushStats flush;
  std::string error;
};

struct RunReport {
  std::uint32_t cores = 0;
  std::uint64_t packets_in = 0;
  std::uint64_t processed = 0;
  std::uint64_t dropped = 0;
  std::uint64_t nf_drops = 0;
  std::chrono::nanoseconds duration{0};
  double pps = 0.0;
  std::vector<CoreReport> per_core;

  /// Fields: cores, packets_in, processed, dropped, duration_ns, pps, per_core[].
  std::string to_json() const;
};

/// A fixed set of per-core workers, each with its own bounded queue,
/// CoreCache and flusher. Flows are pinned to workers by rss_hash.
class WorkerPool {
 public:
  WorkerPool(StoreDriver& driver, PoolOptions options);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  /// Spawns the workers and builds one handler per core. Rethrows any
  /// handler-construction failure (e.g. StoreUnavailable on hydration).
  void start(HandlerFactory factory, EgressHook hook = {});
  /// Enqueues to the flow's core. Returns false if the packet was dropped.
  bool dispatch(const Packet& packet);
  /// Lets the queues drain, finishes handlers, drains every cache to the
  /// store, joins the workers and reports.
  RunReport stop();
  /// start + dispatch everything from `source` + stop.
  RunReport run(HandlerFactory factory, PacketSource& source, EgressHook hook = {});

  const PoolOptions& options() const noexcept { return options_; }
  /// Per-core processed flow sets; filled when options().record_flows.
  const std::vector<std::unordered_set<FlowKey, FlowKeyHash>>& processed_flows() const noexcept {
    return flows_;
  }

 private:
  struct Worker;
  void worker_main(Worker& w, const HandlerFactory& factory);

  StoreDriver& driver_;
  PoolOptions options_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<std::unordered_set<FlowKey, FlowKeyHash>> flows_;
  EgressHook hook_;
  std::atomic<bool> stopping_{false};
  bool running_ = false;
  std::uint64_t packets_in_ = 0;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace flexstate
