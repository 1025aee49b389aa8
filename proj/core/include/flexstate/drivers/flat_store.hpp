#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "flexstate/drivers/resp.hpp"
#include "flexstate/mutation.hpp"

namespace flexstate::flat {

/// In-memory flat-keyspace store that executes a RESP2 command subset with
/// the increment-on-missing and empty-collection-deletes-key semantics of
/// a key-value server. Shared by the in-process "flatkvs" driver and the
/// mini RESP server, so both speak exactly the same command language.
///
/// Every command, and every batch, executes atomically under one mutex.
class FlatKeyspaceStore {
 public:
  resp::Reply execute(const resp::Command& command);

  /// Executes the commands as one atomic unit. Returns std::nullopt when
  /// (session, sequence) was already applied; sequence 0 never dedups.
  std::optional<std::vector<resp::Reply>> execute_batch(std::uint64_t session,
                                                        std::uint64_t sequence,
                                                        const std::vector<resp::Command>& commands);

  std::size_t key_count() const;

 private:
  using Hash = std::map<std::string, std::string>;
  using SetT = std::set<std::string>;
  using ListT = std::deque<std::string>;
  using Value = std::variant<std::string, Hash, SetT, ListT>;

  resp::Reply execute_locked(const resp::Command& command);

  mutable std::mutex mutex_;
  std::unordered_map<std::string, Value> data_;
  std::unordered_map<std::uint64_t, std::uint64_t> last_sequence_;
};

/// Translation of batches into flat-keyspace commands: the canonical
/// rendered StoreKey is used verbatim as the store key.
std::vector<resp::Command> commands_for(const MutationBatch& batch);
resp::Command command_for(const KeyedMutation& item);
resp::Command fetch_command(const StoreKey& key);
Snapshot snapshot_from_reply(StructureType type, const resp::Reply& reply);

/// KEYS pattern matching exactly the keys that start with `prefix`.
std::string prefix_pattern(std::string_view prefix);
bool glob_match(std::string_view pattern, std::string_view text);

}  // namespace flexstate::flat
