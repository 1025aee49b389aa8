#include "flexstate/mutation.hpp"

#include <sstream>

namespace flexstate {

bool mutation_fits(StructureType type, const Mutation& m) noexcept {
  if (std::holds_alternative<mut::Delete>(m)) return true;
  switch (type) {
    case StructureType::NameValue: return std::holds_alternative<mut::SetBlob>(m);
    case StructureType::Counter:
      return std::holds_alternative<mut::Incr>(m) || std::holds_alternative<mut::CounterSet>(m);
    case StructureType::List:
      return std::holds_alternative<mut::ListAppend>(m) || std::holds_alternative<mut::ListClear>(m);
    case StructureType::Set:
      return std::holds_alternative<mut::SetAdd>(m) || std::holds_alternative<mut::SetDel>(m);
    case StructureType::Map:
      return std::holds_alternative<mut::MapSet>(m) || std::holds_alternative<mut::MapDel>(m);
    case StructureType::CounterMap:
      return std::holds_alternative<mut::MapIncr>(m) || std::holds_alternative<mut::CounterMapSet>(m) ||
             std::holds_alternative<mut::MapDel>(m);
  }
  return false;
}

namespace {

std::string quoted(const Blob& b) {
  std::ostringstream out;
  out << '"';
  for (unsigned char c : b) {
    if (c >= 0x20 && c < 0x7f && c != '"' && c != '\\') {
      out << static_cast<char>(c);
    } else {
      static const char* hex = "0123456789abcdef";
      out << "\\x" << hex[c >> 4] << hex[c & 0xf];
    }
  }
  out << '"';
  return out.str();
}

}  // namespace

std::string describe(const Mutation& m) {
  return std::visit(
      [](const auto& op) -> std::string {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, mut::SetBlob>) return "set_blob(" + quoted(op.value) + ")";
        if constexpr (std::is_same_v<T, mut::Delete>) return "delete";
        if constexpr (std::is_same_v<T, mut::Incr>) return "incr(" + std::to_string(op.delta) + ")";
        if constexpr (std::is_same_v<T, mut::CounterSet>) return "counter_set(" + std::to_string(op.value) + ")";
        if constexpr (std::is_same_v<T, mut::MapSet>) return "map_set(" + quoted(op.key) + "," + quoted(op.value) + ")";
        if constexpr (std::is_same_v<T, mut::MapDel>) return "map_del(" + quoted(op.key) + ")";
        if constexpr (std::is_same_v<T, mut::MapIncr>) return "map_incr(" + quoted(op.key) + "," + std::to_string(op.delta) + ")";
        if constexpr (std::is_same_v<T, mut::CounterMapSet>) return "countermap_set(" + quoted(op.key) + "," + std::to_string(op.value) + ")";
        if constexpr (std::is_same_v<T, mut::ListAppend>) return "list_append(" + quoted(op.value) + ")";
        if constexpr (std::is_same_v<T, mut::ListClear>) return "list_clear";
        if constexpr (std::is_same_v<T, mut::SetAdd>) return "set_add(" + quoted(op.value) + ")";
        if constexpr (std::is_same_v<T, mut::SetDel>) return "set_del(" + quoted(op.value) + ")";
      },
      m);
}

std::string describe(const Snapshot& s) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "absent";
        } else if constexpr (std::is_same_v<T, Blob>) {
          return quoted(v);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, ListValue> || std::is_same_v<T, SetValue>) {
          std::string out = std::is_same_v<T, ListValue> ? "[" : "{";
          bool first = true;
          for (const auto& e : v) {
            if (!first) out += ",";
            first = false;
            out += quoted(e);
          }
          return out + (std::is_same_v<T, ListValue> ? "]" : "}");
        } else {
          std::string out = "{";
          bool first = true;
          for (const auto& [k, val] : v) {
            if (!first) out += ",";
            first = false;
            out += quoted(k) + ":";
            if constexpr (std::is_same_v<T, MapValue>) {
              out += quoted(val);
            } else {
              out += std::to_string(val);
            }
          }
          return out + "}";
        }
      },
      s);
}

}  // namespace flexstate
