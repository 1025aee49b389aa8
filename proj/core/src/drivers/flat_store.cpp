#include "flexstate/drivers/flat_store.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "flexstate/error.hpp"

namespace flexstate::flat {

using resp::Command;
using resp::Reply;

namespace {

const Reply kWrongType =
    Reply::error("WRONGTYPE Operation against a key holding the wrong kind of value");
const Reply kNotInteger = Reply::error("ERR value is not an integer or out of range");
const Reply kOverflow = Reply::error("ERR increment or decrement would overflow");

Reply wrong_arity(const std::string& name) {
  return Reply::error("ERR wrong number of arguments for '" + name + "' command");
}

std::optional<std::int64_t> strict_int(std::string_view s) {
  if (s.empty() || s.size() > 20) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  // reject non-canonical forms such as "007" or "-0"
  if (std::to_string(v) != s) return std::nullopt;
  return v;
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

Reply bulk_array(std::vector<std::string> items) {
  std::vector<Reply> out;
  out.reserve(items.size());
  for (auto& s : items) out.push_back(Reply::bulk(std::move(s)));
  return Reply::array(std::move(out));
}

// [abc], [^a-z]; `p` points at '['. Returns the match and moves `p` past ']'.
// An unterminated class is treated as a literal '['.
bool match_class(std::string_view pattern, std::size_t& p, char c) {
  std::size_t i = p + 1;
  bool negate = i < pattern.size() && pattern[i] == '^';
  if (negate) ++i;
  bool hit = false;
  bool closed = false;
  while (i < pattern.size()) {
    char lo = pattern[i];
    if (lo == ']') {
      closed = true;
      break;
    }
    if (lo == '\\' && i + 1 < pattern.size()) lo = pattern[++i];
    if (i + 2 < pattern.size() && pattern[i + 1] == '-' && pattern[i + 2] != ']') {
      char hi = pattern[i + 2];
      if (lo > hi) std::swap(lo, hi);
      hit |= c >= lo && c <= hi;
      i += 3;
    } else {
      hit |= c == lo;
      ++i;
    }
  }
  if (!closed) {
    ++p;
    return c == '[';
  }
  p = i + 1;
  return hit != negate;
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view text) {
  // Iterative matcher with single-star backtracking; supports * ? [...] and \ escapes.
  std::size_t p = 0, t = 0;
  std::size_t star_p = std::string_view::npos, star_t = 0;
  while (t < text.size()) {
    if (p < pattern.size()) {
      char pc = pattern[p];
      if (pc == '*') {
        star_p = p++;
        star_t = t;
        continue;
      }
      if (pc == '?') {
        ++p;
        ++t;
        continue;
      }
      if (pc == '[') {
        std::size_t next = p;
        if (match_class(pattern, next, text[t])) {
          p = next;
          ++t;
          continue;
        }
      } else if (pc == '\\' && p + 1 < pattern.size()) {
        if (pattern[p + 1] == text[t]) {
          p += 2;
          ++t;
          continue;
        }
      } else if (pc == text[t]) {
        ++p;
        ++t;
        continue;
      }
    }
    if (star_p == std::string_view::npos) return false;
    p = star_p + 1;
    t = ++star_t;
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::string prefix_pattern(std::string_view prefix) {
  std::string out;
  out.reserve(prefix.size() + 8);
  for (char c : prefix) {
    if (c == '*' || c == '?' || c == '[' || c == ']' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('*');
  return out;
}

Reply FlatKeyspaceStore::execute(const Command& command) {
  std::lock_guard lock(mutex_);
  return execute_locked(command);
}

std::optional<std::vector<Reply>> FlatKeyspaceStore::execute_batch(
    std::uint64_t session, std::uint64_t sequence, const std::vector<Command>& commands) {
  std::lock_guard lock(mutex_);
  if (sequence != 0) {
    auto& last = last_sequence_[session];
    if (sequence <= last) return std::nullopt;
    last = sequence;
  }
  std::vector<Reply> replies;
  replies.reserve(commands.size());
  for (const auto& cmd : commands) replies.push_back(execute_locked(cmd));
  return replies;
}

std::size_t FlatKeyspaceStore::key_count() const {
  std::lock_guard lock(mutex_);
  return data_.size();
}

Reply FlatKeyspaceStore::execute_locked(const Command& cmd) {
  if (cmd.empty()) return Reply::error("ERR empty command");
  const std::string name = upper(cmd[0]);
  const std::size_t argc = cmd.size();

  auto find_as = [&]<typename T>(const std::string& key, T*& out) -> bool {
    out = nullptr;
    auto it = data_.find(key);
    if (it == data_.end()) return true;
    out = std::get_if<T>(&it->second);
    return out != nullptr;
  };

  if (name == "PING") {
    if (argc == 1) return Reply::simple("PONG");
    if (argc == 2) return Reply::bulk(cmd[1]);
    return wrong_arity("ping");
  }
  if (name == "SET") {
    if (argc != 3) return wrong_arity("set");
    data_[cmd[1]] = cmd[2];
    return Reply::simple("OK");
  }
  if (name == "GET") {
    if (argc != 2) return wrong_arity("get");
    std::string* s = nullptr;
    if (!find_as(cmd[1], s)) return kWrongType;
    return s ? Reply::bulk(*s) : Reply::null_bulk();
  }
  if (name == "DEL" || name == "EXISTS") {
    if (argc < 2) return wrong_arity(name == "DEL" ? "del" : "exists");
    std::int64_t n = 0;
    for (std::size_t i = 1; i < argc; ++i) {
      if (name == "DEL") {
        n += static_cast<std::int64_t>(data_.erase(cmd[i]));
      } else {
        n += data_.count(cmd[i]) ? 1 : 0;
      }
    }
    return Reply::integer_of(n);
  }
  if (name == "INCRBY") {
    if (argc != 3) return wrong_arity("incrby");
    auto delta = strict_int(cmd[2]);
    if (!delta) return kNotInteger;
    std::string* s = nullptr;
    if (!find_as(cmd[1], s)) return kWrongType;
    std::int64_t current = 0;
    if (s) {
      auto parsed = strict_int(*s);
      if (!parsed) return kNotInteger;
      current = *parsed;
    }
    std::int64_t next = 0;
    if (__builtin_add_overflow(current, *delta, &next)) return kOverflow;
    data_[cmd[1]] = std::to_string(next);
    return Reply::integer_of(next);
  }
  if (name == "HSET") {
    if (argc < 4 || (argc - 2) % 2 != 0) return wrong_arity("hset");
    Hash* h = nullptr;
    if (!find_as(cmd[1], h)) return kWrongType;
    if (!h) h = &std::get<Hash>(data_[cmd[1]] = Hash{});
    std::int64_t added = 0;
    for (std::size_t i = 2; i + 1 < argc; i += 2) {
      auto [it, inserted] = h->insert_or_assign(cmd[i], cmd[i + 1]);
      added += inserted ? 1 : 0;
    }
    return Reply::integer_of(added);
  }
  if (name == "HGET") {
    if (argc != 3) return wrong_arity("hget");
    Hash* h = nullptr;
    if (!find_as(cmd[1], h)) return kWrongType;
    if (!h) return Reply::null_bulk();
    auto it = h->find(cmd[2]);
    return it == h->end() ? Reply::null_bulk() : Reply::bulk(it->second);
  }
  if (name == "HDEL") {
    if (argc < 3) return wrong_arity("hdel");
    Hash* h = nullptr;
    if (!find_as(cmd[1], h)) return kWrongType;
    if (!h) return Reply::integer_of(0);
    std::int64_t removed = 0;
    for (std::size_t i = 2; i < argc; ++i) removed += static_cast<std::int64_t>(h->erase(cmd[i]));
    if (h->empty()) data_.erase(cmd[1]);
    return Reply::integer_of(removed);
  }
  if (name == "HINCRBY") {
    if (argc != 4) return wrong_arity("hincrby");
    auto delta = strict_int(cmd[3]);
    if (!delta) return kNotInteger;
    Hash* h = nullptr;
    if (!find_as(cmd[1], h)) return kWrongType;
    std::int64_t current = 0;
    if (h) {
      if (auto it = h->find(cmd[2]); it != h->end()) {
        auto parsed = strict_int(it->second);
        if (!parsed) return Reply::error("ERR hash value is not an integer");
        current = *parsed;
      }
    }
    std::int64_t next = 0;
    if (__builtin_add_overflow(current, *delta, &next)) return kOverflow;
    if (!h) h = &std::get<Hash>(data_[cmd[1]] = Hash{});
    (*h)[cmd[2]] = std::to_string(next);
    return Reply::integer_of(next);
  }
  if (name == "HGETALL") {
    if (argc != 2) return wrong_arity("hgetall");
    Hash* h = nullptr;
    if (!find_as(cmd[1], h)) return kWrongType;
    std::vector<std::string> flat;
    if (h) {
      flat.reserve(h->size() * 2);
      for (const auto& [f, v] : *h) {
        flat.push_back(f);
        flat.push_back(v);
      }
    }
    return bulk_array(std::move(flat));
  }
  if (name == "HLEN") {
    if (argc != 2) return wrong_arity("hlen");
    Hash* h = nullptr;
    if (!find_as(cmd[1], h)) return kWrongType;
    return Reply::integer_of(h ? static_cast<std::int64_t>(h->size()) : 0);
  }
  if (name == "SADD") {
    if (argc < 3) return wrong_arity("sadd");
    SetT* s = nullptr;
    if (!find_as(cmd[1], s)) return kWrongType;
    if (!s) s = &std::get<SetT>(data_[cmd[1]] = SetT{});
    std::int64_t added = 0;
    for (std::size_t i = 2; i < argc; ++i) added += s->insert(cmd[i]).second ? 1 : 0;
    return Reply::integer_of(added);
  }
  if (name == "SREM") {
    if (argc < 3) return wrong_arity("srem");
    SetT* s = nullptr;
    if (!find_as(cmd[1], s)) return kWrongType;
    if (!s) return Reply::integer_of(0);
    std::int64_t removed = 0;
    for (std::size_t i = 2; i < argc; ++i) removed += static_cast<std::int64_t>(s->erase(cmd[i]));
    if (s->empty()) data_.erase(cmd[1]);
    return Reply::integer_of(removed);
  }
  if (name == "SMEMBERS") {
    if (argc != 2) return wrong_arity("smembers");
    SetT* s = nullptr;
    if (!find_as(cmd[1], s)) return kWrongType;
    return bulk_array(s ? std::vector<std::string>(s->begin(), s->end()) : std::vector<std::string>{});
  }
  if (name == "SISMEMBER") {
    if (argc != 3) return wrong_arity("sismember");
    SetT* s = nullptr;
    if (!find_as(cmd[1], s)) return kWrongType;
    return Reply::integer_of(s && s->count(cmd[2]) ? 1 : 0);
  }
  if (name == "RPUSH") {
    if (argc < 3) return wrong_arity("rpush");
    ListT* l = nullptr;
    if (!find_as(cmd[1], l)) return kWrongType;
    if (!l) l = &std::get<ListT>(data_[cmd[1]] = ListT{});
    for (std::size_t i = 2; i < argc; ++i) l->push_back(cmd[i]);
    return Reply::integer_of(static_cast<std::int64_t>(l->size()));
  }
  if (name == "LRANGE") {
    if (argc != 4) return wrong_arity("lrange");
    auto start = strict_int(cmd[2]);
    auto stop = strict_int(cmd[3]);
    if (!start || !stop) return kNotInteger;
    ListT* l = nullptr;
    if (!find_as(cmd[1], l)) return kWrongType;
    std::vector<std::string> out;
    if (l && !l->empty()) {
      auto len = static_cast<std::int64_t>(l->size());
      std::int64_t b = *start < 0 ? len + *start : *start;
      std::int64_t e = *stop < 0 ? len + *stop : *stop;
      b = std::max<std::int64_t>(b, 0);
      e = std::min<std::int64_t>(e, len - 1);
      for (std::int64_t i = b; i <= e; ++i) out.push_back((*l)[static_cast<std::size_t>(i)]);
    }
    return bulk_array(std::move(out));
  }
  if (name == "LLEN") {
    if (argc != 2) return wrong_arity("llen");
    ListT* l = nullptr;
    if (!find_as(cmd[1], l)) return kWrongType;
    return Reply::integer_of(l ? static_cast<std::int64_t>(l->size()) : 0);
  }
  if (name == "KEYS") {
    if (argc != 2) return wrong_arity("keys");
    std::vector<std::string> out;
    for (const auto& [k, v] : data_) {
      if (glob_match(cmd[1], k)) out.push_back(k);
    }
    std::sort(out.begin(), out.end());
    return bulk_array(std::move(out));
  }
  if (name == "DBSIZE") {
    if (argc != 1) return wrong_arity("dbsize");
    return Reply::integer_of(static_cast<std::int64_t>(data_.size()));
  }
  if (name == "FLUSHALL") {
    data_.clear();
    last_sequence_.clear();
    return Reply::simple("OK");
  }
  return Reply::error("ERR unknown command '" + cmd[0] + "'");
}

Command command_for(const KeyedMutation& item) {
  std::string key = item.key.render();
  return std::visit(
      [&](const auto& m) -> Command {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, mut::SetBlob>) return {"SET", key, m.value};
        if constexpr (std::is_same_v<T, mut::Delete>) return {"DEL", key};
        if constexpr (std::is_same_v<T, mut::Incr>) return {"INCRBY", key, std::to_string(m.delta)};
        if constexpr (std::is_same_v<T, mut::CounterSet>) return {"SET", key, std::to_string(m.value)};
        if constexpr (std::is_same_v<T, mut::MapSet>) return {"HSET", key, m.key, m.value};
        if constexpr (std::is_same_v<T, mut::MapDel>) return {"HDEL", key, m.key};
        if constexpr (std::is_same_v<T, mut::MapIncr>) {
          return {"HINCRBY", key, m.key, std::to_string(m.delta)};
        }
        if constexpr (std::is_same_v<T, mut::CounterMapSet>) {
          return {"HSET", key, m.key, std::to_string(m.value)};
        }
        if constexpr (std::is_same_v<T, mut::ListAppend>) return {"RPUSH", key, m.value};
        if constexpr (std::is_same_v<T, mut::ListClear>) return {"DEL", key};
        if constexpr (std::is_same_v<T, mut::SetAdd>) return {"SADD", key, m.value};
        if constexpr (std::is_same_v<T, mut::SetDel>) return {"SREM", key, m.value};
      },
      item.op);
}

std::vector<Command> commands_for(const MutationBatch& batch) {
  std::vector<Command> out;
  out.reserve(batch.items.size());
  for (const auto& item : batch.items) out.push_back(command_for(item));
  return out;
}

Command fetch_command(const StoreKey& key) {
  std::string k = key.render();
  switch (key.type) {
    case StructureType::NameValue:
    case StructureType::Counter: return {"GET", k};
    case StructureType::List: return {"LRANGE", k, "0", "-1"};
    case StructureType::Set: return {"SMEMBERS", k};
    case StructureType::Map:
    case StructureType::CounterMap: return {"HGETALL", k};
  }
  return {};
}

Snapshot snapshot_from_reply(StructureType type, const Reply& reply) {
  if (reply.is_error()) throw Error(Errc::ProtocolError, "store replied " + reply.text);

  auto require_array = [&]() -> const std::vector<Reply>& {
    if (reply.kind != Reply::Kind::Array) {
      throw Error(Errc::ProtocolError, "expected array reply, got " + resp::describe(reply));
    }
    for (const auto& e : reply.elements) {
      if (e.kind != Reply::Kind::Bulk) throw Error(Errc::ProtocolError, "expected bulk element");
    }
    return reply.elements;
  };
  auto parse_counter = [](const std::string& s) {
    auto v = strict_int(s);
    if (!v) throw Error(Errc::ProtocolError, "counter value '" + s + "' is not an integer");
    return *v;
  };

  switch (type) {
    case StructureType::NameValue:
    case StructureType::Counter: {
      if (reply.kind == Reply::Kind::NullBulk) return std::monostate{};
      if (reply.kind != Reply::Kind::Bulk) {
        throw Error(Errc::ProtocolError, "expected bulk reply, got " + resp::describe(reply));
      }
      if (type == StructureType::Counter) return parse_counter(reply.text);
      return Blob(reply.text);
    }
    case StructureType::List: {
      const auto& items = require_array();
      if (items.empty()) return std::monostate{};
      ListValue out;
      for (const auto& e : items) out.push_back(e.text);
      return out;
    }
    case StructureType::Set: {
      const auto& items = require_array();
      if (items.empty()) return std::monostate{};
      SetValue out;
      for (const auto& e : items) out.insert(e.text);
      return out;
    }
    case StructureType::Map:
    case StructureType::CounterMap: {
      const auto& items = require_array();
      if (items.size() % 2 != 0) throw Error(Errc::ProtocolError, "odd HGETALL reply");
      if (items.empty()) return std::monostate{};
      if (type == StructureType::Map) {
        MapValue out;
        for (std::size_t i = 0; i < items.size(); i += 2) out[items[i].text] = items[i + 1].text;
        return out;
      }
      CounterMapValue out;
      for (std::size_t i = 0; i < items.size(); i += 2) {
        out[items[i].text] = parse_counter(items[i + 1].text);
      }
      return out;
    }
  }
  return std::monostate{};
}

}  // namespace flexstate::flat
