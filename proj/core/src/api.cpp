#include "flexstate/api.hpp"

namespace flexstate {

using BlobMap = std::unordered_map<Blob, Blob>;
using CountMap = std::unordered_map<Blob, std::int64_t>;

// Counter

std::int64_t Counter::apply_add(std::int64_t n) {
  auto& v = live<std::optional<std::int64_t>>();
  const auto next = checked_add(v.value_or(0), n);
  cache_->log_counter_add(*s_, n, next);
  v = next;
  return next;
}

std::int64_t Counter::add(std::int64_t n) {
  auto next = apply_add(n);
  wait();
  return next;
}

void Counter::apply_update(std::int64_t value) {
  auto& v = live<std::optional<std::int64_t>>();
  cache_->log_counter_set(*s_, value);
  v = value;
}

void Counter::update(std::int64_t value) {
  apply_update(value);
  wait();
}

void Counter::apply_erase() {
  auto& v = live<std::optional<std::int64_t>>();
  cache_->log_whole(*s_, mut::Delete{});
  v.reset();
}

void Counter::erase() {
  apply_erase();
  wait();
}

// NameValue

void NameValue::apply_write(Blob value, bool must_exist) {
  check_blob(value);
  auto& v = live<std::optional<Blob>>();
  if (must_exist && !v) throw Error(Errc::NotFound, "update of absent value " + key().render());
  cache_->log_whole(*s_, mut::SetBlob{value});
  v = std::move(value);
}

void NameValue::create(Blob value) {
  apply_write(std::move(value), false);
  wait();
}

void NameValue::update(Blob value) {
  apply_write(std::move(value), true);
  wait();
}

void NameValue::apply_erase() {
  auto& v = live<std::optional<Blob>>();
  if (!v) throw Error(Errc::NotFound, "delete of absent value " + key().render());
  cache_->log_whole(*s_, mut::Delete{});
  v.reset();
}

void NameValue::erase() {
  apply_erase();
  wait();
}

// Map

std::optional<Blob> Map::get(const Blob& key) const {
  if (const auto* v = find(key)) return *v;
  return std::nullopt;
}

const Blob* Map::find(const Blob& key) const {
  const auto& m = live<BlobMap>();
  auto it = m.find(key);
  return it == m.end() ? nullptr : &it->second;
}

bool Map::contains(const Blob& key) const { return live<BlobMap>().count(key) != 0; }

MapValue Map::entries() const {
  const auto& m = live<BlobMap>();
  return MapValue(m.begin(), m.end());
}

void Map::apply_insert(Blob key, Blob value) {
  check_entry_key(key);
  check_blob(value);
  auto& m = live<BlobMap>();
  cache_->log_entry(*s_, key, mut::MapSet{key, value});
  m.insert_or_assign(std::move(key), std::move(value));
}

void Map::insert(Blob key, Blob value) {
  apply_insert(std::move(key), std::move(value));
  wait();
}

bool Map::apply_remove(const Blob& key) {
  check_entry_key(key);
  auto& m = live<BlobMap>();
  auto it = m.find(key);
  if (it == m.end()) return false;
  cache_->log_entry(*s_, key, mut::MapDel{key});
  m.erase(it);
  return true;
}

bool Map::remove(const Blob& key) {
  bool removed = apply_remove(key);
  wait();
  return removed;
}

void Map::apply_clear() {
  auto& m = live<BlobMap>();
  if (m.empty()) return;
  cache_->log_reset(*s_, mut::Delete{});
  m.clear();
}

void Map::clear() {
  apply_clear();
  wait();
}

// CounterMap

std::optional<std::int64_t> CounterMap::get(const Blob& key) const {
  const auto& m = live<CountMap>();
  auto it = m.find(key);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

bool CounterMap::contains(const Blob& key) const { return live<CountMap>().count(key) != 0; }

CounterMapValue CounterMap::entries() const {
  const auto& m = live<CountMap>();
  return CounterMapValue(m.begin(), m.end());
}

std::int64_t CounterMap::apply_add_to(const Blob& key, std::int64_t n) {
  check_entry_key(key);
  auto& m = live<CountMap>();
  auto it = m.find(key);
  const auto next = checked_add(it == m.end() ? 0 : it->second, n);
  cache_->log_entry_add(*s_, key, n, next);
  if (it == m.end()) {
    m.emplace(key, next);
  } else {
    it->second = next;
  }
  return next;
}

std::int64_t CounterMap::add_to(const Blob& key, std::int64_t n) {
  auto next = apply_add_to(key, n);
  wait();
  return next;
}

void CounterMap::apply_insert(Blob key, std::int64_t value) {
  check_entry_key(key);
  auto& m = live<CountMap>();
  cache_->log_entry(*s_, key, mut::CounterMapSet{key, value});
  m.insert_or_assign(std::move(key), value);
}

void CounterMap::insert(Blob key, std::int64_t value) {
  apply_insert(std::move(key), value);
  wait();
}

bool CounterMap::apply_remove(const Blob& key) {
  check_entry_key(key);
  auto& m = live<CountMap>();
  auto it = m.find(key);
  if (it == m.end()) return false;
  cache_->log_entry(*s_, key, mut::MapDel{key});
  m.erase(it);
  return true;
}

bool CounterMap::remove(const Blob& key) {
  bool removed = apply_remove(key);
  wait();
  return removed;
}

void CounterMap::apply_clear() {
  auto& m = live<CountMap>();
  if (m.empty()) return;
  cache_->log_reset(*s_, mut::Delete{});
  m.clear();
}

void CounterMap::clear() {
  apply_clear();
  wait();
}

// List

const Blob& List::get(std::size_t index) const {
  const auto& l = live<std::vector<Blob>>();
  if (index >= l.size()) {
    throw Error(Errc::IndexOutOfRange,
                std::to_string(index) + " >= length " + std::to_string(l.size()) + " of " + key().render());
  }
  return l[index];
}

void List::apply_push(Blob value) {
  check_element(value);
  auto& l = live<std::vector<Blob>>();
  cache_->log_append(*s_, mut::ListAppend{value});
  l.push_back(std::move(value));
}

void List::push_back(Blob value) {
  apply_push(std::move(value));
  wait();
}

void List::apply_clear() {
  auto& l = live<std::vector<Blob>>();
  if (l.empty()) return;
  cache_->log_reset(*s_, mut::ListClear{});
  l.clear();
}

void List::clear() {
  apply_clear();
  wait();
}

// Set

bool Set::contains(const Blob& value) const { return live<std::unordered_set<Blob>>().count(value) != 0; }

SetValue Set::members() const {
  const auto& s = live<std::unordered_set<Blob>>();
  return SetValue(s.begin(), s.end());
}

bool Set::apply_insert(Blob value) {
  check_element(value);
  auto& s = live<std::unordered_set<Blob>>();
  if (s.count(value)) return false;
  cache_->log_entry(*s_, value, mut::SetAdd{value});
  s.insert(std::move(value));
  return true;
}

bool Set::insert(Blob value) {
  bool added = apply_insert(std::move(value));
  wait();
  return added;
}

bool Set::apply_remove(const Blob& value) {
  auto& s = live<std::unordered_set<Blob>>();
  auto it = s.find(value);
  if (it == s.end()) return false;
  cache_->log_entry(*s_, value, mut::SetDel{value});
  s.erase(it);
  return true;
}

bool Set::remove(const Blob& value) {
  bool removed = apply_remove(value);
  wait();
  return removed;
}

void Set::apply_clear() {
  auto& s = live<std::unordered_set<Blob>>();
  if (s.empty()) return;
  cache_->log_reset(*s_, mut::Delete{});
  s.clear();
}

void Set::clear() {
  apply_clear();
  wait();
}

AnyHandle StateContext::create_structure(StructureType type, std::string_view id) {
  switch (type) {
    case StructureType::NameValue: return create<NameValue>(id);
    case StructureType::Counter: return create<Counter>(id);
    case StructureType::List: return create<List>(id);
    case StructureType::Set: return create<Set>(id);
    case StructureType::Map: return create<Map>(id);
    case StructureType::CounterMap: return create<CounterMap>(id);
  }
  throw Error(Errc::InvalidArgument, "unknown structure type");
}

}  // namespace flexstate
