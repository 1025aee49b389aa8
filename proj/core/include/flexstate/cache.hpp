#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "flexstate/error.hpp"
#include "flexstate/key.hpp"
#include "flexstate/mutation.hpp"
#include "flexstate/store.hpp"

namespace flexstate {

using LiveValue = std::variant<std::optional<Blob>,                   // NameValue
                               std::optional<std::int64_t>,           // Counter
                               std::vector<Blob>,                     // List
                               std::unordered_set<Blob>,              // Set
                               std::unordered_map<Blob, Blob>,        // Map
                               std::unordered_map<Blob, std::int64_t>  // CounterMap
                               >;

/// One cached structure of a core. Handles point at it directly; the
/// address is stable for the lifetime of the owning CoreCache.
struct LiveStructure {
  StoreKey key;
  LiveValue value;

  // Coalescing bookkeeping for the pending log; valid only while
  // `log_epoch` equals the cache's current epoch.
  std::uint64_t log_epoch = 0;
  std::size_t whole_slot = kNoSlot;
  std::unordered_map<Blob, std::size_t> entry_slots;

  static constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);

  StructureType type() const noexcept { return key.type; }
};

/// Snapshot of the live value in store form (empty collections are absent).
Snapshot to_snapshot(const LiveValue& value);
LiveValue from_snapshot(StructureType type, const Snapshot& snapshot);

struct FlushStats {
  std::uint64_t flushes_attempted = 0;
  std::uint64_t flushes_succeeded = 0;
  std::uint64_t mutations_flushed = 0;
  std::uint64_t retries = 0;
  std::uint64_t backpressure_events = 0;
  std::chrono::nanoseconds last_flush_latency{0};

  std::string to_json() const;
  std::string to_text() const;
};

struct CacheOptions {
  std::chrono::microseconds flush_interval{1000};
  std::size_t backpressure_limit = std::size_t{1} << 20;
  std::chrono::milliseconds backoff_base{1};
  std::chrono::milliseconds backoff_cap{100};
  /// Consecutive failed flush attempts after which a waiting call reports StoreUnavailable.
  int sync_max_failures = 5;
  /// Consecutive failed flush attempts after which drain gives up.
  int drain_max_failures = 12;
  /// Where drain writes the unflushed state when it gives up.
  std::filesystem::path dump_directory = std::filesystem::temp_directory_path();
};

/// Per-core write-back cache with its background flusher.
///
/// The worker thread owns every live value and the pending mutation log.
/// At flush points (tick) the worker moves the pending log into a single
/// hand-off slot; the flusher thread submits it through its own driver
/// session, retrying with exponential backoff. While the slot is busy the
/// worker keeps accumulating, so a slow store merges more mutations into
/// the next batch instead of blocking the packet path.
class CoreCache {
 public:
  CoreCache(std::string nf_id, std::string instance_id, std::uint32_t core_id, StoreDriver& driver,
            CacheOptions options = {});
  ~CoreCache();
  CoreCache(const CoreCache&) = delete;
  CoreCache& operator=(const CoreCache&) = delete;

  std::uint32_t core_id() const noexcept { return core_id_; }
  const std::string& nf_id() const noexcept { return nf_id_; }
  const std::string& instance_id() const noexcept { return instance_id_; }
  const CacheOptions& options() const noexcept { return options_; }

  /// Returns the structure for (type, id), hydrating it from the store on
  /// first use. Throws InvalidId, TypeConflict or StoreUnavailable.
  LiveStructure& open(StructureType type, std::string_view id);

  // Pending-log recording, called by handles after validating the
  // operation and before committing the live value. Each may throw
  // Backpressure when it would grow the log past the limit.
  void log_counter_add(LiveStructure& s, std::int64_t delta, std::int64_t new_value);
  void log_counter_set(LiveStructure& s, std::int64_t value);
  void log_whole(LiveStructure& s, Mutation op);
  void log_entry(LiveStructure& s, const Blob& entry, Mutation op);
  void log_entry_add(LiveStructure& s, const Blob& entry, std::int64_t delta, std::int64_t new_value);
  void log_append(LiveStructure& s, Mutation op);
  void log_reset(LiveStructure& s, Mutation op);

  /// Worker-side flush point: hands the pending log to the flusher when
  /// the interval has elapsed and the flusher is idle. Never blocks.
  void tick(std::chrono::steady_clock::time_point now);
  void tick() { tick(std::chrono::steady_clock::now()); }

  /// Hands off everything pending and waits for the store acknowledgement.
  /// Throws StoreUnavailable after sync_max_failures consecutive failures.
  void flush_sync();

  /// Flushes everything and waits; afterwards the store equals the live
  /// state. Throws ConnectionLost after drain_max_failures, having written
  /// the unflushed mutations to a dump file (see last_dump_path()).
  void flush_now_and_drain();

  std::size_t pending_size() const noexcept { return pending_.size(); }
  /// Copy of the pending log in store form (for tests and dumps).
  MutationBatch pending_batch() const;
  FlushStats stats() const;
  std::vector<const LiveStructure*> structures() const;
  const std::optional<std::filesystem::path>& last_dump_path() const noexcept { return last_dump_; }

  void bind_owner() noexcept { owner_.store(std::this_thread::get_id()); }
  void check_owner() const {
#if defined(FLEXSTATE_CHECK_OWNERSHIP)
    auto owner = owner_.load();
    if (owner != std::thread::id{} && owner != std::this_thread::get_id()) {
      throw Error(Errc::WrongCore, "state of core " + std::to_string(core_id_) +
                                       " used from another thread");
    }
#endif
  }

 private:
  struct PendingEntry {
    LiveStructure* target;
    Mutation op;
  };

  bool slots_current(const LiveStructure& s) const noexcept { return s.log_epoch == epoch_; }
  void refresh_slots(LiveStructure& s);
  std::size_t append(LiveStructure& s, Mutation op);
  void ensure_capacity();
  MutationBatch take_pending();
  // Requires mutex_ held and slot_ empty.
  void hand_off_locked();
  void wait_for_ack(int max_failures, Errc on_failure);
  void flusher_loop();
  void write_dump();

  std::string nf_id_;
  std::string instance_id_;
  std::uint32_t core_id_;
  CacheOptions options_;
  std::unique_ptr<StoreSession> control_session_;
  std::unique_ptr<StoreSession> flush_session_;

  // worker-owned
  std::unordered_map<std::string, std::unique_ptr<LiveStructure>> structures_;
  std::vector<PendingEntry> pending_;
  std::uint64_t epoch_ = 1;
  std::uint64_t next_sequence_ = 1;
  std::chrono::steady_clock::time_point next_flush_;
  std::optional<std::filesystem::path> last_dump_;
  std::atomic<std::thread::id> owner_{};

  // shared with the flusher, guarded by mutex_
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::optional<MutationBatch> slot_;
  std::uint64_t acked_sequence_ = 0;
  int consecutive_failures_ = 0;
  bool stop_ = false;

  struct AtomicStats {
    std::atomic<std::uint64_t> attempted{0};
    std::atomic<std::uint64_t> succeeded{0};
    std::atomic<std::uint64_t> mutations{0};
    std::atomic<std::uint64_t> retries{0};
    std::atomic<std::uint64_t> backpressure{0};
    std::atomic<std::int64_t> last_latency_ns{0};
  } stats_;

  std::thread flusher_;
};

}  // namespace flexstate
