#include "flexstate/cache.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace flexstate {

namespace {

template <typename T>
T* get_op(Mutation& m) {
  return std::get_if<T>(&m);
}

}  // namespace

Snapshot to_snapshot(const LiveValue& value) {
  return std::visit(
      [](const auto& v) -> Snapshot {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::optional<Blob>>) {
          if (!v) return std::monostate{};
          return *v;
        } else if constexpr (std::is_same_v<T, std::optional<std::int64_t>>) {
          if (!v) return std::monostate{};
          return *v;
        } else if constexpr (std::is_same_v<T, std::vector<Blob>>) {
          if (v.empty()) return std::monostate{};
          return ListValue(v.begin(), v.end());
        } else if constexpr (std::is_same_v<T, std::unordered_set<Blob>>) {
          if (v.empty()) return std::monostate{};
          return SetValue(v.begin(), v.end());
        } else if constexpr (std::is_same_v<T, std::unordered_map<Blob, Blob>>) {
          if (v.empty()) return std::monostate{};
          return MapValue(v.begin(), v.end());
        } else {
          if (v.empty()) return std::monostate{};
          return CounterMapValue(v.begin(), v.end());
        }
      },
      value);
}

LiveValue from_snapshot(StructureType type, const Snapshot& snapshot) {
  auto mismatch = [&]() {
    return Error(Errc::ProtocolError, "store returned " + describe(snapshot) + " for a " +
                                          std::string(type_token(type)));
  };
  const bool absent = is_absent(snapshot);
  switch (type) {
    case StructureType::NameValue: {
      if (absent) return std::optional<Blob>{};
      if (const auto* b = std::get_if<Blob>(&snapshot)) return std::optional<Blob>{*b};
      throw mismatch();
    }
    case StructureType::Counter: {
      if (absent) return std::optional<std::int64_t>{};
      if (const auto* v = std::get_if<std::int64_t>(&snapshot)) return std::optional<std::int64_t>{*v};
      throw mismatch();
    }
    case StructureType::List: {
      if (absent) return std::vector<Blob>{};
      if (const auto* l = std::get_if<ListValue>(&snapshot)) return std::vector<Blob>(*l);
      throw mismatch();
    }
    case StructureType::Set: {
      if (absent) return std::unordered_set<Blob>{};
      if (const auto* s = std::get_if<SetValue>(&snapshot)) {
        return std::unordered_set<Blob>(s->begin(), s->end());
      }
      throw mismatch();
    }
    case StructureType::Map: {
      if (absent) return std::unordered_map<Blob, Blob>{};
      if (const auto* m = std::get_if<MapValue>(&snapshot)) {
        return std::unordered_map<Blob, Blob>(m->begin(), m->end());
      }
      throw mismatch();
    }
    case StructureType::CounterMap: {
      if (absent) return std::unordered_map<Blob, std::int64_t>{};
      if (const auto* m = std::get_if<CounterMapValue>(&snapshot)) {
        return std::unordered_map<Blob, std::int64_t>(m->begin(), m->end());
      }
      throw mismatch();
    }
  }
  throw mismatch();
}

std::string FlushStats::to_json() const {
  nlohmann::json j;
  j["flushes_attempted"] = flushes_attempted;
  j["flushes_succeeded"] = flushes_succeeded;
  j["mutations_flushed"] = mutations_flushed;
  j["retries"] = retries;
  j["backpressure_events"] = backpressure_events;
  j["last_flush_latency_ns"] = last_flush_latency.count();
  return j.dump();
}

std::string FlushStats::to_text() const {
  std::ostringstream out;
  out << "flushes_attempted " << flushes_attempted << "\n"
      << "flushes_succeeded " << flushes_succeeded << "\n"
      << "mutations_flushed " << mutations_flushed << "\n"
      << "retries " << retries << "\n"
      << "backpressure_events " << backpressure_events << "\n"
      << "last_flush_latency_ns " << last_flush_latency.count() << "\n";
  return out.str();
}

CoreCache::CoreCache(std::string nf_id, std::string instance_id, std::uint32_t core_id,
                     StoreDriver& driver, CacheOptions options)
    : nf_id_(std::move(nf_id)),
      instance_id_(std::move(instance_id)),
      core_id_(core_id),
      options_(std::move(options)) {
  if (options_.flush_interval.count() <= 0) {
    throw Error(Errc::BadDuration, "flush interval must be positive");
  }
  // validates the identity tokens up front
  (void)instance_prefix(nf_id_, instance_id_);
  control_session_ = driver.open_session();
  flush_session_ = driver.open_session();
  next_flush_ = std::chrono::steady_clock::now() + options_.flush_interval;
  flusher_ = std::thread([this] { flusher_loop(); });
}

CoreCache::~CoreCache() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  if (flusher_.joinable()) flusher_.join();
}

LiveStructure& CoreCache::open(StructureType type, std::string_view id) {
  check_owner();
  check_structure_id(id);
  if (auto it = structures_.find(std::string(id)); it != structures_.end()) {
    if (it->second->type() != type) {
      throw Error(Errc::TypeConflict, "'" + std::string(id) + "' already created as " +
                                          std::string(type_token(it->second->type())));
    }
    return *it->second;
  }

  auto s = std::make_unique<LiveStructure>();
  s->key = build_key(nf_id_, instance_id_, core_id_, type, id);
  Snapshot snapshot;
  try {
    snapshot = control_session_->fetch(s->key);
  } catch (const Error& e) {
    throw Error(Errc::StoreUnavailable, "hydrating " + s->key.render() + ": " + e.what());
  }
  s->value = from_snapshot(type, snapshot);
  auto& ref = *s;
  structures_.emplace(std::string(id), std::move(s));
  return ref;
}

void CoreCache::refresh_slots(LiveStructure& s) {
  if (s.log_epoch == epoch_) return;
  s.log_epoch = epoch_;
  s.whole_slot = LiveStructure::kNoSlot;
  s.entry_slots.clear();
}

void CoreCache::ensure_capacity() {
  if (pending_.size() >= options_.backpressure_limit) {
    stats_.backpressure.fetch_add(1, std::memory_order_relaxed);
    throw Error(Errc::Backpressure, "core " + std::to_string(core_id_) + " has " +
                                        std::to_string(pending_.size()) + " unflushed mutations");
  }
}

std::size_t CoreCache::append(LiveStructure& s, Mutation op) {
  ensure_capacity();
  pending_.push_back(PendingEntry{&s, std::move(op)});
  return pending_.size() - 1;
}

void CoreCache::log_counter_add(LiveStructure& s, std::int64_t delta, std::int64_t new_value) {
  refresh_slots(s);
  if (s.whole_slot != LiveStructure::kNoSlot) {
    auto& op = pending_[s.whole_slot].op;
    if (auto* inc = get_op<mut::Incr>(op)) {
      std::int64_t merged = 0;
      if (!__builtin_add_overflow(inc->delta, delta, &merged)) {
        inc->delta = merged;
        return;
      }
    } else if (auto* set = get_op<mut::CounterSet>(op)) {
      set->value = new_value;
      return;
    }
  }
  s.whole_slot = append(s, mut::Incr{delta});
}

void CoreCache::log_counter_set(LiveStructure& s, std::int64_t value) {
  refresh_slots(s);
  if (s.whole_slot != LiveStructure::kNoSlot) {
    pending_[s.whole_slot].op = mut::CounterSet{value};
    return;
  }
  s.whole_slot = append(s, mut::CounterSet{value});
}

void CoreCache::log_whole(LiveStructure& s, Mutation op) {
  refresh_slots(s);
  if (s.whole_slot != LiveStructure::kNoSlot) {
    pending_[s.whole_slot].op = std::move(op);
    return;
  }
  s.whole_slot = append(s, std::move(op));
}

void CoreCache::log_entry(LiveStructure& s, const Blob& entry, Mutation op) {
  refresh_slots(s);
  if (auto it = s.entry_slots.find(entry); it != s.entry_slots.end()) {
    pending_[it->second].op = std::move(op);
    return;
  }
  auto slot = append(s, std::move(op));
  s.entry_slots.emplace(entry, slot);
}

void CoreCache::log_entry_add(LiveStructure& s, const Blob& entry, std::int64_t delta,
                              std::int64_t new_value) {
  refresh_slots(s);
  if (auto it = s.entry_slots.find(entry); it != s.entry_slots.end()) {
    auto& op = pending_[it->second].op;
    if (auto* inc = get_op<mut::MapIncr>(op)) {
      std::int64_t merged = 0;
      if (!__builtin_add_overflow(inc->delta, delta, &merged)) {
        inc->delta = merged;
        return;
      }
      it->second = append(s, mut::MapIncr{entry, delta});
      return;
    }
    // absolute write (set or delete) of this entry: fold into a set
    op = mut::CounterMapSet{entry, new_value};
    return;
  }
  auto slot = append(s, mut::MapIncr{entry, delta});
  s.entry_slots.emplace(entry, slot);
}

void CoreCache::log_append(LiveStructure& s, Mutation op) { append(s, std::move(op)); }

void CoreCache::log_reset(LiveStructure& s, Mutation op) {
  refresh_slots(s);
  append(s, std::move(op));
  s.whole_slot = LiveStructure::kNoSlot;
  s.entry_slots.clear();
}

MutationBatch CoreCache::take_pending() {
  MutationBatch batch;
  batch.sequence = next_sequence_++;
  batch.items.reserve(pending_.size());
  for (auto& e : pending_) batch.items.push_back(KeyedMutation{e.target->key, std::move(e.op)});
  pending_.clear();
  ++epoch_;
  return batch;
}

MutationBatch CoreCache::pending_batch() const {
  MutationBatch batch;
  for (const auto& e : pending_) batch.items.push_back(KeyedMutation{e.target->key, e.op});
  return batch;
}

void CoreCache::hand_off_locked() { slot_ = take_pending(); }

void CoreCache::tick(std::chrono::steady_clock::time_point now) {
  if (now < next_flush_) return;
  next_flush_ += options_.flush_interval;
  if (next_flush_ <= now) next_flush_ = now + options_.flush_interval;
  if (pending_.empty()) return;

  std::unique_lock lock(mutex_, std::try_to_lock);
  if (!lock || slot_) return;
  hand_off_locked();
  lock.unlock();
  cv_.notify_all();
}

void CoreCache::wait_for_ack(int max_failures, Errc on_failure) {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return !slot_ || consecutive_failures_ >= max_failures; });
  if (slot_) {
    throw Error(on_failure, "store unreachable after " + std::to_string(consecutive_failures_) +
                                " attempts (core " + std::to_string(core_id_) + ")");
  }
  if (pending_.empty()) return;

  hand_off_locked();
  const auto mine = slot_->sequence;
  cv_.notify_all();
  cv_.wait(lock, [&] { return acked_sequence_ >= mine || consecutive_failures_ >= max_failures; });
  if (acked_sequence_ < mine) {
    throw Error(on_failure, "store unreachable after " + std::to_string(consecutive_failures_) +
                                " attempts (core " + std::to_string(core_id_) + ")");
  }
}

void CoreCache::flush_sync() {
  check_owner();
  wait_for_ack(options_.sync_max_failures, Errc::StoreUnavailable);
}

void CoreCache::flush_now_and_drain() {
  try {
    wait_for_ack(options_.drain_max_failures, Errc::ConnectionLost);
  } catch (const Error&) {
    write_dump();
    throw;
  }
}

void CoreCache::write_dump() {
  auto batch_json = [](const MutationBatch& b) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : b.items) {
      items.push_back({{"key", item.key.render()}, {"mutation", describe(item.op)}});
    }
    return nlohmann::json{{"sequence", b.sequence}, {"items", items}};
  };

  nlohmann::json dump;
  dump["nf_id"] = nf_id_;
  dump["instance_id"] = instance_id_;
  dump["core_id"] = core_id_;
  {
    std::lock_guard lock(mutex_);
    dump["in_flight"] = slot_ ? batch_json(*slot_) : nlohmann::json();
  }
  dump["pending"] = batch_json(pending_batch());
  nlohmann::json live = nlohmann::json::object();
  for (const auto& [id, s] : structures_) live[s->key.render()] = describe(to_snapshot(s->value));
  dump["live"] = live;

  auto path = options_.dump_directory /
              ("flexstate-dump-" + nf_id_ + "-" + instance_id_ + "-core" + std::to_string(core_id_) + ".json");
  std::ofstream out(path);
  if (out) {
    out << dump.dump(2) << "\n";
    last_dump_ = path;
  }
}

void CoreCache::flusher_loop() {
  std::unique_lock lock(mutex_);
  while (true) {
    cv_.wait(lock, [&] { return stop_ || slot_.has_value(); });
    if (stop_) break;

    const MutationBatch* batch = &*slot_;
    lock.unlock();

    stats_.attempted.fetch_add(1, std::memory_order_relaxed);
    const auto started = std::chrono::steady_clock::now();
    bool ok = true;
    try {
      flush_session_->apply(*batch);
    } catch (const Error&) {
      ok = false;
    }
    const auto elapsed = std::chrono::steady_clock::now() - started;

    lock.lock();
    if (ok) {
      stats_.succeeded.fetch_add(1, std::memory_order_relaxed);
      stats_.mutations.fetch_add(batch->items.size(), std::memory_order_relaxed);
      stats_.last_latency_ns.store(
          std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count(),
          std::memory_order_relaxed);
      acked_sequence_ = slot_->sequence;
      slot_.reset();
      consecutive_failures_ = 0;
      cv_.notify_all();
      continue;
    }

    ++consecutive_failures_;
    stats_.retries.fetch_add(1, std::memory_order_relaxed);
    cv_.notify_all();
    auto shift = std::min(consecutive_failures_ - 1, 16);
    std::chrono::milliseconds backoff = std::min<std::chrono::milliseconds>(options_.backoff_base * (1LL << shift), options_.backoff_cap);
    cv_.wait_for(lock, backoff, [&] { return stop_; });
  }
}

FlushStats CoreCache::stats() const {
  FlushStats out;
  out.flushes_attempted = stats_.attempted.load(std::memory_order_relaxed);
  out.flushes_succeeded = stats_.succeeded.load(std::memory_order_relaxed);
  out.mutations_flushed = stats_.mutations.load(std::memory_order_relaxed);
  out.retries = stats_.retries.load(std::memory_order_relaxed);
  out.backpressure_events = stats_.backpressure.load(std::memory_order_relaxed);
  out.last_flush_latency = std::chrono::nanoseconds(stats_.last_latency_ns.load(std::memory_order_relaxed));
  return out;
}

std::vector<const LiveStructure*> CoreCache::structures() const {
  std::vector<const LiveStructure*> out;
  for (const auto& [id, s] : structures_) out.push_back(s.get());
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->key < b->key; });
  return out;
}

}  // namespace flexstate
