#include "flexstate/drivers/resp.hpp"

#include <charconv>

#include "flexstate/error.hpp"

namespace flexstate::resp {

namespace {

constexpr std::size_t kMaxBulkBytes = 512 * 1024 * 1024;
constexpr std::int64_t kMaxArrayElements = 1 << 24;
constexpr std::size_t kMaxLineBytes = 64 * 1024;

[[noreturn]] void malformed(const std::string& why) { throw Error(Errc::ProtocolError, why); }

// Returns the line body without CRLF, or nullopt when no CRLF yet.
std::optional<std::string_view> read_line(std::string_view buf, std::size_t& pos) {
  auto crlf = buf.find("\r\n", pos);
  if (crlf == std::string_view::npos) {
    if (buf.size() - pos > kMaxLineBytes) malformed("line too long");
    if (buf.substr(pos).find('\n') != std::string_view::npos) malformed("bare LF in line");
    return std::nullopt;
  }
  auto line = buf.substr(pos, crlf - pos);
  if (line.find('\n') != std::string_view::npos || line.find('\r') != std::string_view::npos) {
    malformed("stray CR/LF in line");
  }
  pos = crlf + 2;
  return line;
}

std::int64_t parse_int(std::string_view digits) {
  std::int64_t v = 0;
  if (digits.empty()) malformed("empty integer");
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    malformed("bad integer '" + std::string(digits) + "'");
  }
  return v;
}

std::optional<Reply> decode_at(std::string_view buf, std::size_t& pos, int depth) {
  if (depth > 32) malformed("nesting too deep");
  if (pos >= buf.size()) return std::nullopt;
  char tag = buf[pos];
  std::size_t cursor = pos + 1;
  auto line = read_line(buf, cursor);
  if (!line) {
    if (tag != '+' && tag != '-' && tag != ':' && tag != '$' && tag != '*') {
      malformed(std::string("unknown type byte 0x") + "0123456789abcdef"[(tag >> 4) & 0xf] +
                "0123456789abcdef"[tag & 0xf]);
    }
    return std::nullopt;
  }

  switch (tag) {
    case '+':
      pos = cursor;
      return Reply::simple(std::string(*line));
    case '-':
      pos = cursor;
      return Reply::error(std::string(*line));
    case ':':
      pos = cursor;
      return Reply::integer_of(parse_int(*line));
    case '$': {
      auto len = parse_int(*line);
      if (len == -1) {
        pos = cursor;
        return Reply::null_bulk();
      }
      if (len < 0 || static_cast<std::size_t>(len) > kMaxBulkBytes) malformed("bad bulk length");
      auto n = static_cast<std::size_t>(len);
      if (buf.size() - cursor < n + 2) return std::nullopt;
      if (buf.substr(cursor + n, 2) != "\r\n") malformed("bulk string not CRLF-terminated");
      pos = cursor + n + 2;
      return Reply::bulk(std::string(buf.substr(cursor, n)));
    }
    case '*': {
      auto count = parse_int(*line);
      if (count == -1) {
        pos = cursor;
        return Reply::null_array();
      }
      if (count < 0 || count > kMaxArrayElements) malformed("bad array length");
      std::vector<Reply> items;
      items.reserve(static_cast<std::size_t>(std::min<std::int64_t>(count, 1024)));
      for (std::int64_t i = 0; i < count; ++i) {
        auto item = decode_at(buf, cursor, depth + 1);
        if (!item) return std::nullopt;
        items.push_back(std::move(*item));
      }
      pos = cursor;
      return Reply::array(std::move(items));
    }
    default:
      malformed("unknown type byte");
  }
}

}  // namespace

void append_command(std::string& out, const Command& command) {
  out.push_back('*');
  out.append(std::to_string(command.size()));
  out.append("\r\n");
  for (const auto& arg : command) {
    out.push_back('$');
    out.append(std::to_string(arg.size()));
    out.append("\r\n");
    out.append(arg);
    out.append("\r\n");
  }
}

std::string encode_command(const Command& command) {
  if (command.empty()) throw Error(Errc::InvalidArgument, "empty RESP command");
  std::string out;
  append_command(out, command);
  return out;
}

void append_reply(std::string& out, const Reply& reply) {
  switch (reply.kind) {
    case Reply::Kind::Simple:
      out.append("+").append(reply.text).append("\r\n");
      break;
    case Reply::Kind::Error:
      out.append("-").append(reply.text).append("\r\n");
      break;
    case Reply::Kind::Integer:
      out.append(":").append(std::to_string(reply.integer)).append("\r\n");
      break;
    case Reply::Kind::Bulk:
      out.append("$").append(std::to_string(reply.text.size())).append("\r\n");
      out.append(reply.text).append("\r\n");
      break;
    case Reply::Kind::NullBulk:
      out.append("$-1\r\n");
      break;
    case Reply::Kind::Array:
      out.append("*").append(std::to_string(reply.elements.size())).append("\r\n");
      for (const auto& e : reply.elements) append_reply(out, e);
      break;
    case Reply::Kind::NullArray:
      out.append("*-1\r\n");
      break;
  }
}

std::string encode_reply(const Reply& reply) {
  std::string out;
  append_reply(out, reply);
  return out;
}

std::optional<Reply> try_decode(std::string_view buffer, std::size_t& consumed) {
  std::size_t pos = 0;
  auto reply = decode_at(buffer, pos, 0);
  if (reply) consumed = pos;
  return reply;
}

Reply decode(std::string_view frame) {
  std::size_t consumed = 0;
  auto reply = try_decode(frame, consumed);
  if (!reply) malformed("incomplete frame");
  if (consumed != frame.size()) malformed("trailing bytes after frame");
  return *reply;
}

Command to_command(const Reply& frame) {
  if (frame.kind != Reply::Kind::Array || frame.elements.empty()) {
    malformed("command must be a non-empty array of bulk strings");
  }
  Command cmd;
  cmd.reserve(frame.elements.size());
  for (const auto& e : frame.elements) {
    if (e.kind != Reply::Kind::Bulk) malformed("command arguments must be bulk strings");
    cmd.push_back(e.text);
  }
  return cmd;
}

std::string describe(const Reply& reply) {
  switch (reply.kind) {
    case Reply::Kind::Simple: return "+" + reply.text;
    case Reply::Kind::Error: return "-" + reply.text;
    case Reply::Kind::Integer: return ":" + std::to_string(reply.integer);
    case Reply::Kind::Bulk: return "$" + reply.text;
    case Reply::Kind::NullBulk: return "$nil";
    case Reply::Kind::NullArray: return "*nil";
    case Reply::Kind::Array: {
      std::string out = "[";
      for (std::size_t i = 0; i < reply.elements.size(); ++i) {
        if (i) out += ", ";
        out += describe(reply.elements[i]);
      }
      return out + "]";
    }
  }
  return {};
}

}  // namespace flexstate::resp
