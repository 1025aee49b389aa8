#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace flexstate {

/// Opaque byte sequence. std::string is used as the byte container; it is
/// binary safe and every driver stores it bit-exact.
using Blob = std::string;

enum class StructureType : std::uint8_t { NameValue, Counter, List, Set, Map, CounterMap };

inline constexpr std::array<StructureType, 6> kAllStructureTypes = {
    StructureType::NameValue, StructureType::Counter, StructureType::List,
    StructureType::Set,       StructureType::Map,     StructureType::CounterMap};

/// Canonical type token used inside store keys and as table names.
std::string_view type_token(StructureType type) noexcept;
std::optional<StructureType> parse_type_token(std::string_view token) noexcept;

inline constexpr char kKeySeparator = '@';
inline constexpr std::size_t kMaxIdBytes = 128;
inline constexpr std::size_t kMaxKeyBytes = 1024;
inline constexpr std::size_t kMaxBlobBytes = 64 * 1024;

/// Tokens (NF id, instance id, structure id) are non-empty printable
/// strings without '@' or whitespace.
bool is_valid_token(std::string_view token) noexcept;
bool is_valid_structure_id(std::string_view id) noexcept;

/// Throw Errc::InvalidId / KeyTooLarge / ValueTooLarge on violation.
void check_structure_id(std::string_view id);
void check_entry_key(std::string_view key);
void check_element(std::string_view element);
void check_blob(std::string_view blob);

/// Overflow-checked signed addition; throws Errc::Overflow.
std::int64_t checked_add(std::int64_t a, std::int64_t b);

}  // namespace flexstate
