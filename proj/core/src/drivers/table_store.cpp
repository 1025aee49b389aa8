#include "flexstate/drivers/table_store.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "flexstate/error.hpp"

namespace flexstate::table {

namespace {

bool single_key(StructureType type) {
  return type == StructureType::NameValue || type == StructureType::Counter;
}

// Removes every row of one structure (partition key1 == id).
void erase_structure(Table& t, const std::string& id) {
  auto first = t.lower_bound(RowKey{id, ""});
  auto last = first;
  while (last != t.end() && last->first.key1 == id) ++last;
  t.erase(first, last);
}

std::int64_t counter_cell(const Cell& c) {
  if (const auto* v = std::get_if<std::int64_t>(&c)) return *v;
  throw Error(Errc::ProtocolError, "non-counter cell in counter column");
}

std::int64_t add_or_throw(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw Error(Errc::ProtocolError, "counter overflow");
  return out;
}

std::string literal(const Blob& b) {
  bool printable = !b.empty() && std::all_of(b.begin(), b.end(), [](unsigned char c) {
    return c > 0x20 && c < 0x7f && c != '\'' && c != ',' && c != ')';
  });
  if (printable) return b;
  std::string out = "0x";
  static const char* hex = "0123456789abcdef";
  for (unsigned char c : b) {
    out.push_back(hex[c >> 4]);
    out.push_back(hex[c & 0xf]);
  }
  return out;
}

}  // namespace

bool TableStore::apply(std::uint64_t session, const MutationBatch& batch) {
  std::lock_guard lock(mutex_);
  if (batch.sequence != 0) {
    auto& last = last_sequence_[session];
    if (batch.sequence <= last) return false;
    last = batch.sequence;
  }
  for (const auto& item : batch.items) apply_one(item);
  return true;
}

void TableStore::apply_one(const KeyedMutation& item) {
  const auto& key = item.key;
  if (!mutation_fits(key.type, item.op)) {
    throw Error(Errc::ProtocolError,
                describe(item.op) + " does not apply to table " + std::string(type_token(key.type)));
  }
  Table& t = keyspaces_[key.partition()][std::string(type_token(key.type))];
  const std::string& id = key.structure_id;

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, mut::Delete> || std::is_same_v<T, mut::ListClear>) {
          erase_structure(t, id);
        } else if constexpr (std::is_same_v<T, mut::SetBlob>) {
          t[RowKey{id, ""}] = m.value;
        } else if constexpr (std::is_same_v<T, mut::Incr>) {
          auto [it, fresh] = t.try_emplace(RowKey{id, ""}, std::int64_t{0});
          it->second = add_or_throw(counter_cell(it->second), m.delta);
        } else if constexpr (std::is_same_v<T, mut::CounterSet>) {
          t[RowKey{id, ""}] = m.value;
        } else if constexpr (std::is_same_v<T, mut::MapSet>) {
          t[RowKey{id, m.key}] = m.value;
        } else if constexpr (std::is_same_v<T, mut::MapDel>) {
          t.erase(RowKey{id, m.key});
        } else if constexpr (std::is_same_v<T, mut::MapIncr>) {
          auto [it, fresh] = t.try_emplace(RowKey{id, m.key}, std::int64_t{0});
          it->second = add_or_throw(counter_cell(it->second), m.delta);
        } else if constexpr (std::is_same_v<T, mut::CounterMapSet>) {
          t[RowKey{id, m.key}] = m.value;
        } else if constexpr (std::is_same_v<T, mut::ListAppend>) {
          char index[24];
          std::snprintf(index, sizeof index, "%020llu",
                        static_cast<unsigned long long>(++list_counter_));
          t[RowKey{id, index}] = m.value;
        } else if constexpr (std::is_same_v<T, mut::SetAdd>) {
          t[RowKey{id, m.value}] = Blob{};
        } else if constexpr (std::is_same_v<T, mut::SetDel>) {
          t.erase(RowKey{id, m.value});
        }
      },
      item.op);
}

Snapshot TableStore::select(const StoreKey& key) const {
  std::lock_guard lock(mutex_);
  return select_locked(key);
}

Snapshot TableStore::select_locked(const StoreKey& key) const {
  auto ks = keyspaces_.find(key.partition());
  if (ks == keyspaces_.end()) return std::monostate{};
  auto tb = ks->second.find(type_token(key.type));
  if (tb == ks->second.end()) return std::monostate{};
  const Table& t = tb->second;
  const std::string& id = key.structure_id;

  if (single_key(key.type)) {
    auto it = t.find(RowKey{id, ""});
    if (it == t.end()) return std::monostate{};
    if (key.type == StructureType::Counter) return counter_cell(it->second);
    return std::get<Blob>(it->second);
  }

  auto it = t.lower_bound(RowKey{id, ""});
  if (it == t.end() || it->first.key1 != id) return std::monostate{};
  switch (key.type) {
    case StructureType::List: {
      ListValue out;
      for (; it != t.end() && it->first.key1 == id; ++it) out.push_back(std::get<Blob>(it->second));
      return out;
    }
    case StructureType::Set: {
      SetValue out;
      for (; it != t.end() && it->first.key1 == id; ++it) out.insert(it->first.key2);
      return out;
    }
    case StructureType::Map: {
      MapValue out;
      for (; it != t.end() && it->first.key1 == id; ++it) {
        out.emplace(it->first.key2, std::get<Blob>(it->second));
      }
      return out;
    }
    case StructureType::CounterMap: {
      CounterMapValue out;
      for (; it != t.end() && it->first.key1 == id; ++it) {
        out.emplace(it->first.key2, counter_cell(it->second));
      }
      return out;
    }
    default:
      return std::monostate{};
  }
}

ScanResult TableStore::scan(std::string_view nf_id, std::string_view instance_id) const {
  const std::string prefix = instance_prefix(nf_id, instance_id);
  std::lock_guard lock(mutex_);
  ScanResult out;
  for (auto ks = keyspaces_.lower_bound(prefix);
       ks != keyspaces_.end() && ks->first.compare(0, prefix.size(), prefix) == 0; ++ks) {
    std::string_view core_str = std::string_view(ks->first).substr(prefix.size());
    std::uint32_t core = 0;
    auto [ptr, ec] = std::from_chars(core_str.data(), core_str.data() + core_str.size(), core);
    if (ec != std::errc{} || ptr != core_str.data() + core_str.size()) continue;

    for (const auto& [table_name, t] : ks->second) {
      auto type = parse_type_token(table_name);
      if (!type) continue;
      const std::string* last_id = nullptr;
      for (const auto& [row, cell] : t) {
        if (last_id && *last_id == row.key1) continue;
        last_id = &row.key1;
        StoreKey key{std::string(nf_id), std::string(instance_id), core, *type, row.key1};
        out.emplace_back(key, select_locked(key));
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::optional<Table> TableStore::table(const std::string& keyspace,
                                       const std::string& table_name) const {
  std::lock_guard lock(mutex_);
  auto ks = keyspaces_.find(keyspace);
  if (ks == keyspaces_.end()) return std::nullopt;
  auto tb = ks->second.find(table_name);
  if (tb == ks->second.end()) return std::nullopt;
  return tb->second;
}

std::vector<std::string> TableStore::keyspaces() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, ks] : keyspaces_) out.push_back(name);
  return out;
}

std::string statement_for(const KeyedMutation& item) {
  const std::string table =
      item.key.partition() + "." + std::string(type_token(item.key.type));
  const std::string& id = item.key.structure_id;
  const bool single = single_key(item.key.type);

  return std::visit(
      [&](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, mut::Delete> || std::is_same_v<T, mut::ListClear>) {
          return "DELETE FROM " + table + " WHERE " + (single ? "key=" : "key1=") + id;
        } else if constexpr (std::is_same_v<T, mut::SetBlob>) {
          return "INSERT INTO " + table + " (key, value) VALUES (" + id + ", " + literal(m.value) + ")";
        } else if constexpr (std::is_same_v<T, mut::Incr>) {
          return "UPDATE " + table + " SET value = value + " + std::to_string(m.delta) +
                 " WHERE key=" + id;
        } else if constexpr (std::is_same_v<T, mut::CounterSet>) {
          return "UPDATE " + table + " SET value = " + std::to_string(m.value) + " WHERE key=" + id;
        } else if constexpr (std::is_same_v<T, mut::MapSet>) {
          return "INSERT INTO " + table + " (key1, key2, value) VALUES (" + id + ", " +
                 literal(m.key) + ", " + literal(m.value) + ")";
        } else if constexpr (std::is_same_v<T, mut::MapDel>) {
          return "DELETE FROM " + table + " WHERE key1=" + id + " AND key2=" + literal(m.key);
        } else if constexpr (std::is_same_v<T, mut::MapIncr>) {
          return "UPDATE " + table + " SET value = value + " + std::to_string(m.delta) +
                 " WHERE key1=" + id + " AND key2=" + literal(m.key);
        } else if constexpr (std::is_same_v<T, mut::CounterMapSet>) {
          return "UPDATE " + table + " SET value = " + std::to_string(m.value) + " WHERE key1=" + id +
                 " AND key2=" + literal(m.key);
        } else if constexpr (std::is_same_v<T, mut::ListAppend>) {
          return "INSERT INTO " + table + " (key1, key2, value) VALUES (" + id + ", next, " +
                 literal(m.value) + ")";
        } else if constexpr (std::is_same_v<T, mut::SetAdd>) {
          return "INSERT INTO " + table + " (key1, key2) VALUES (" + id + ", " + literal(m.value) + ")";
        } else {
          return "DELETE FROM " + table + " WHERE key1=" + id + " AND key2=" + literal(m.value);
        }
      },
      item.op);
}

std::string select_statement(const StoreKey& key) {
  const std::string table = key.partition() + "." + std::string(type_token(key.type));
  if (single_key(key.type)) return "SELECT value FROM " + table + " WHERE key=" + key.structure_id;
  return "SELECT key2, value FROM " + table + " WHERE key1=" + key.structure_id;
}

}  // namespace flexstate::table
