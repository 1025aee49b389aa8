#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "flexstate/types.hpp"

namespace flexstate {

/// Globally unique address of one partitioned state structure:
/// which NF, which instance of it, which core, and which structure.
struct StoreKey {
  std::string nf_id;
  std::string instance_id;
  std::uint32_t core_id = 0;
  StructureType type = StructureType::NameValue;
  std::string structure_id;

  /// "nf@instance@core@Type@id"
  std::string render() const;
  /// "nf@instance@core", the per-core partition (table-store keyspace).
  std::string partition() const;

  friend auto operator<=>(const StoreKey&, const StoreKey&) = default;
  friend bool operator==(const StoreKey&, const StoreKey&) = default;
};

/// Validates every token and returns the key; throws Errc::InvalidToken
/// (or Errc::InvalidId for the structure id).
StoreKey build_key(std::string_view nf_id, std::string_view instance_id, std::uint32_t core_id,
                   StructureType type, std::string_view structure_id);

/// Inverse of StoreKey::render. Throws Errc::InvalidToken on any malformed input.
StoreKey parse_key(std::string_view rendered);

/// "nf@instance@", the prefix shared by every key of one NF instance.
std::string instance_prefix(std::string_view nf_id, std::string_view instance_id);

}  // namespace flexstate
