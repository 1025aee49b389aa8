#include "flexstate/error.hpp"
#include "flexstate/types.hpp"

#include <limits>

namespace flexstate {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidId: return "InvalidId";
    case Errc::InvalidToken: return "InvalidToken";
    case Errc::TypeConflict: return "TypeConflict";
    case Errc::StoreUnavailable: return "StoreUnavailable";
    case Errc::Overflow: return "Overflow";
    case Errc::NotFound: return "NotFound";
    case Errc::KeyTooLarge: return "KeyTooLarge";
    case Errc::ValueTooLarge: return "ValueTooLarge";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnknownDriver: return "UnknownDriver";
    case Errc::MissingField: return "MissingField";
    case Errc::BadDuration: return "BadDuration";
    case Errc::ConnectionLost: return "ConnectionLost";
    case Errc::ProtocolError: return "ProtocolError";
    case Errc::BindFailure: return "BindFailure";
    case Errc::Backpressure: return "Backpressure";
    case Errc::QueueOverflow: return "QueueOverflow";
    case Errc::PoolExhausted: return "PoolExhausted";
    case Errc::EmptyServerList: return "EmptyServerList";
    case Errc::ParseError: return "ParseError";
    case Errc::WrongCore: return "WrongCore";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view type_token(StructureType type) noexcept {
  switch (type) {
    case StructureType::NameValue: return "NameValue";
    case StructureType::Counter: return "Counter";
    case StructureType::List: return "List";
    case StructureType::Set: return "Set";
    case StructureType::Map: return "Map";
    case StructureType::CounterMap: return "Countermap";
  }
  return "";
}

std::optional<StructureType> parse_type_token(std::string_view token) noexcept {
  for (auto type : kAllStructureTypes) {
    if (type_token(type) == token) return type;
  }
  return std::nullopt;
}

bool is_valid_token(std::string_view token) noexcept {
  if (token.empty()) return false;
  for (unsigned char c : token) {
    // printable ASCII excluding space; '@' is the key separator
    if (c <= 0x20 || c >= 0x7f || c == kKeySeparator) return false;
  }
  return true;
}

bool is_valid_structure_id(std::string_view id) noexcept {
  return id.size() <= kMaxIdBytes && is_valid_token(id);
}

void check_structure_id(std::string_view id) {
  if (!is_valid_structure_id(id)) {
    throw Error(Errc::InvalidId, "structure id '" + std::string(id.substr(0, 64)) + "'");
  }
}

void check_entry_key(std::string_view key) {
  if (key.empty() || key.size() > kMaxKeyBytes) {
    throw Error(Errc::KeyTooLarge, "entry key must be 1.." + std::to_string(kMaxKeyBytes) +
                                       " bytes, got " + std::to_string(key.size()));
  }
}

void check_element(std::string_view element) {
  if (element.size() > kMaxKeyBytes) {
    throw Error(Errc::ValueTooLarge, "collection element of " + std::to_string(element.size()) +
                                         " bytes exceeds " + std::to_string(kMaxKeyBytes));
  }
}

void check_blob(std::string_view blob) {
  if (blob.size() > kMaxBlobBytes) {
    throw Error(Errc::ValueTooLarge, "blob of " + std::to_string(blob.size()) + " bytes");
  }
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(Errc::Overflow, std::to_string(a) + " + " + std::to_string(b));
  }
  return out;
}

}  // namespace flexstate
