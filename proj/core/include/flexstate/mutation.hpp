#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "flexstate/key.hpp"
#include "flexstate/types.hpp"

namespace flexstate {

/// Store-level mutations. Every driver translates these into its own
/// command language; the set is closed so translation is exhaustive.
namespace mut {
struct SetBlob { Blob value; };
struct Delete {};
struct Incr { std::int64_t delta = 0; };
struct CounterSet { std::int64_t value = 0; };
struct MapSet { Blob key; Blob value; };
struct MapDel { Blob key; };
struct MapIncr { Blob key; std::int64_t delta = 0; };
struct CounterMapSet { Blob key; std::int64_t value = 0; };
struct ListAppend { Blob value; };
struct ListClear {};
struct SetAdd { Blob value; };
struct SetDel { Blob value; };

inline bool operator==(const SetBlob& a, const SetBlob& b) { return a.value == b.value; }
inline bool operator==(const Delete&, const Delete&) { return true; }
inline bool operator==(const Incr& a, const Incr& b) { return a.delta == b.delta; }
inline bool operator==(const CounterSet& a, const CounterSet& b) { return a.value == b.value; }
inline bool operator==(const MapSet& a, const MapSet& b) { return a.key == b.key && a.value == b.value; }
inline bool operator==(const MapDel& a, const MapDel& b) { return a.key == b.key; }
inline bool operator==(const MapIncr& a, const MapIncr& b) { return a.key == b.key && a.delta == b.delta; }
inline bool operator==(const CounterMapSet& a, const CounterMapSet& b) {
  return a.key == b.key && a.value == b.value;
}
inline bool operator==(const ListAppend& a, const ListAppend& b) { return a.value == b.value; }
inline bool operator==(const ListClear&, const ListClear&) { return true; }
inline bool operator==(const SetAdd& a, const SetAdd& b) { return a.value == b.value; }
inline bool operator==(const SetDel& a, const SetDel& b) { return a.value == b.value; }
}  // namespace mut

using Mutation = std::variant<mut::SetBlob, mut::Delete, mut::Incr, mut::CounterSet, mut::MapSet,
                              mut::MapDel, mut::MapIncr, mut::CounterMapSet, mut::ListAppend,
                              mut::ListClear, mut::SetAdd, mut::SetDel>;

struct KeyedMutation {
  StoreKey key;
  Mutation op;
};

/// Ordered mutations of one core partition. `sequence` is the per-session
/// batch number used for exactly-once retry; 0 disables deduplication.
struct MutationBatch {
  std::uint64_t sequence = 0;
  std::vector<KeyedMutation> items;

  bool empty() const noexcept { return items.empty(); }
  std::size_t size() const noexcept { return items.size(); }
};

using ListValue = std::vector<Blob>;
using SetValue = std::set<Blob>;
using MapValue = std::map<Blob, Blob>;
using CounterMapValue = std::map<Blob, std::int64_t>;

/// Store content of one structure. std::monostate means absent; an empty
/// collection is reported as absent by every driver.
using Snapshot = std::variant<std::monostate, Blob, std::int64_t, ListValue, SetValue, MapValue,
                              CounterMapValue>;

inline bool is_absent(const Snapshot& s) noexcept { return std::holds_alternative<std::monostate>(s); }

/// Whether a mutation kind is meaningful for a structure type; drivers
/// reject batches that pair them wrongly.
bool mutation_fits(StructureType type, const Mutation& m) noexcept;

std::string describe(const Mutation& m);
std::string describe(const Snapshot& s);

}  // namespace flexstate
