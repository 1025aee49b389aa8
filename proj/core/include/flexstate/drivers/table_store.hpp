#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "flexstate/mutation.hpp"
#include "flexstate/store.hpp"

namespace flexstate::table {

/// A row cell: either an opaque blob or a counter column.
using Cell = std::variant<Blob, std::int64_t>;

/// Row address inside one table. Single-key tables (NameValue, Counter)
/// leave key2 empty; List rows use a zero-padded append index as key2.
struct RowKey {
  std::string key1;
  std::string key2;
  friend auto operator<=>(const RowKey&, const RowKey&) = default;
};

/// One table of a keyspace, ordered by (key1, key2) like a clustered
/// partition so that all rows of one structure are contiguous.
using Table = std::map<RowKey, Cell>;

/// Table-organised store: keyspace "nf@instance@core" -> table named after
/// the structure type -> rows. Maps, countermaps, sets and lists are
/// expanded to one row per entry.
class TableStore {
 public:
  /// Applies the batch atomically. Returns false when (session, sequence)
  /// was already applied.
  bool apply(std::uint64_t session, const MutationBatch& batch);
  Snapshot select(const StoreKey& key) const;
  ScanResult scan(std::string_view nf_id, std::string_view instance_id) const;

  /// Copy of one table, for layout inspection.
  std::optional<Table> table(const std::string& keyspace, const std::string& table_name) const;
  std::vector<std::string> keyspaces() const;

 private:
  using Keyspace = std::map<std::string, Table, std::less<>>;

  void apply_one(const KeyedMutation& item);
  Snapshot select_locked(const StoreKey& key) const;

  mutable std::mutex mutex_;
  std::map<std::string, Keyspace, std::less<>> keyspaces_;
  std::unordered_map<std::uint64_t, std::uint64_t> last_sequence_;
  std::uint64_t list_counter_ = 0;
};

/// CQL-like text of the statement a mutation translates to, e.g.
/// "UPDATE nf1@ins1@1.Counter SET value = value + 5 WHERE key=counter_id".
std::string statement_for(const KeyedMutation& item);
std::string select_statement(const StoreKey& key);

}  // namespace flexstate::table
