#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "flexstate/cache.hpp"
#include "flexstate/error.hpp"
#include "flexstate/types.hpp"

namespace flexstate {

/// The store-agnostic state API. Handles are cheap views over one cached
/// structure of one core; copies alias the same structure. Mutating calls
/// come in two forms: the plain form waits for the store acknowledgement,
/// the `_nowait` form only updates the local cache and returns.
namespace detail {

class HandleBase {
 public:
  HandleBase() = default;
  HandleBase(CoreCache& cache, LiveStructure& s) : cache_(&cache), s_(&s) {}

  const StoreKey& key() const noexcept { return s_->key; }
  std::string_view id() const noexcept { return s_->key.structure_id; }
  std::uint32_t core() const noexcept { return s_->key.core_id; }
  explicit operator bool() const noexcept { return s_ != nullptr; }

 protected:
  template <typename T>
  T& live() const {
    cache_->check_owner();
    return std::get<T>(s_->value);
  }
  void wait() const { cache_->flush_sync(); }

  CoreCache* cache_ = nullptr;
  LiveStructure* s_ = nullptr;
};

}  // namespace detail

class Counter : public detail::HandleBase {
 public:
  using HandleBase::HandleBase;
  static constexpr StructureType kType = StructureType::Counter;

  /// Current value; a counter never written reads as 0.
  std::int64_t read() const { return live<std::optional<std::int64_t>>().value_or(0); }
  bool exists() const { return live<std::optional<std::int64_t>>().has_value(); }

  std::int64_t add(std::int64_t n);
  void add_nowait(std::int64_t n) { (void)apply_add(n); }
  /// Absolute write; supersedes any pending increments.
  void update(std::int64_t value);
  void update_nowait(std::int64_t value) { apply_update(value); }
  void erase();
  void erase_nowait() { apply_erase(); }

 private:
  std::int64_t apply_add(std::int64_t n);
  void apply_update(std::int64_t value);
  void apply_erase();
};

class NameValue : public detail::HandleBase {
 public:
  using HandleBase::HandleBase;
  static constexpr StructureType kType = StructureType::NameValue;

  std::optional<Blob> read() const { return live<std::optional<Blob>>(); }
  bool exists() const { return live<std::optional<Blob>>().has_value(); }

  void create(Blob value);
  void create_nowait(Blob value) { apply_write(std::move(value), false); }
  /// Throws NotFound when no value exists.
  void update(Blob value);
  void update_nowait(Blob value) { apply_write(std::move(value), true); }
  /// Throws NotFound when no value exists.
  void erase();
  void erase_nowait() { apply_erase(); }

 private:
  void apply_write(Blob value, bool must_exist);
  void apply_erase();
};

class Map : public detail::HandleBase {
 public:
  using HandleBase::HandleBase;
  static constexpr StructureType kType = StructureType::Map;

  std::optional<Blob> get(const Blob& key) const;
  /// Pointer into the cached entry, or nullptr; invalidated by the next mutation.
  const Blob* find(const Blob& key) const;
  bool contains(const Blob& key) const;
  std::size_t size() const { return live<std::unordered_map<Blob, Blob>>().size(); }
  MapValue entries() const;

  void insert(Blob key, Blob value);
  void insert_nowait(Blob key, Blob value) { apply_insert(std::move(key), std::move(value)); }
  /// Returns whether the key was present.
  bool remove(const Blob& key);
  bool remove_nowait(const Blob& key) { return apply_remove(key); }
  void clear();
  void clear_nowait() { apply_clear(); }

 private:
  void apply_insert(Blob key, Blob value);
  bool apply_remove(const Blob& key);
  void apply_clear();
};

class CounterMap : public detail::HandleBase {
 public:
  using HandleBase::HandleBase;
  static constexpr StructureType kType = StructureType::CounterMap;

  std::optional<std::int64_t> get(const Blob& key) const;
  bool contains(const Blob& key) const;
  std::size_t size() const { return live<std::unordered_map<Blob, std::int64_t>>().size(); }
  CounterMapValue entries() const;

  /// Adds n to entry `key`; a missing entry counts as 0. Returns the new value.
  std::int64_t add_to(const Blob& key, std::int64_t n);
  std::int64_t add_to_nowait(const Blob& key, std::int64_t n) { return apply_add_to(key, n); }
  void insert(Blob key, std::int64_t value);
  void insert_nowait(Blob key, std::int64_t value) { apply_insert(std::move(key), value); }
  bool remove(const Blob& key);
  bool remove_nowait(const Blob& key) { return apply_remove(key); }
  void clear();
  void clear_nowait() { apply_clear(); }

 private:
  std::int64_t apply_add_to(const Blob& key, std::int64_t n);
  void apply_insert(Blob key, std::int64_t value);
  bool apply_remove(const Blob& key);
  void apply_clear();
};

class List : public detail::HandleBase {
 public:
  using HandleBase::HandleBase;
  static constexpr StructureType kType = StructureType::List;

  /// Throws IndexOutOfRange.
  const Blob& get(std::size_t index) const;
  std::size_t len() const { return live<std::vector<Blob>>().size(); }
  const std::vector<Blob>& items() const { return live<std::vector<Blob>>(); }

  void push_back(Blob value);
  void push_back_nowait(Blob value) { apply_push(std::move(value)); }
  void clear();
  void clear_nowait() { apply_clear(); }

 private:
  void apply_push(Blob value);
  void apply_clear();
};

class Set : public detail::HandleBase {
 public:
  using HandleBase::HandleBase;
  static constexpr StructureType kType = StructureType::Set;

  bool contains(const Blob& value) const;
  std::size_t size() const { return live<std::unordered_set<Blob>>().size(); }
  SetValue members() const;

  /// Returns whether the value was newly added.
  bool insert(Blob value);
  bool insert_nowait(Blob value) { return apply_insert(std::move(value)); }
  bool remove(const Blob& value);
  bool remove_nowait(const Blob& value) { return apply_remove(value); }
  void clear();
  void clear_nowait() { apply_clear(); }

 private:
  bool apply_insert(Blob value);
  bool apply_remove(const Blob& value);
  void apply_clear();
};

using AnyHandle = std::variant<NameValue, Counter, List, Set, Map, CounterMap>;

/// Per-core entry point handed to packet-processing code. Structures are
/// partitioned by (NF id, instance id, core id), so code on different
/// cores never shares state.
class StateContext {
 public:
  explicit StateContext(CoreCache& cache) : cache_(&cache) {}

  std::uint32_t core_id() const noexcept { return cache_->core_id(); }

  template <typename Handle>
  Handle create(std::string_view id) {
    return Handle(*cache_, cache_->open(Handle::kType, id));
  }

  Counter counter(std::string_view id) { return create<Counter>(id); }
  NameValue name_value(std::string_view id) { return create<NameValue>(id); }
  Map map(std::string_view id) { return create<Map>(id); }
  CounterMap counter_map(std::string_view id) { return create<CounterMap>(id); }
  List list(std::string_view id) { return create<List>(id); }
  Set set(std::string_view id) { return create<Set>(id); }

  AnyHandle create_structure(StructureType type, std::string_view id);

  /// Flush point for the worker loop; see CoreCache::tick.
  void tick() { cache_->tick(); }

 private:
  CoreCache* cache_;
};

}  // namespace flexstate
