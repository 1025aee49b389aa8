#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace flexstate::resp {

/// RESP2 reply value.
struct Reply {
  enum class Kind { Simple, Error, Integer, Bulk, NullBulk, Array, NullArray };

  Kind kind = Kind::NullBulk;
  std::string text;            // Simple, Error, Bulk
  std::int64_t integer = 0;    // Integer
  std::vector<Reply> elements; // Array

  static Reply simple(std::string s) { return {Kind::Simple, std::move(s), 0, {}}; }
  static Reply error(std::string s) { return {Kind::Error, std::move(s), 0, {}}; }
  static Reply integer_of(std::int64_t v) { return {Kind::Integer, {}, v, {}}; }
  static Reply bulk(std::string s) { return {Kind::Bulk, std::move(s), 0, {}}; }
  static Reply null_bulk() { return {Kind::NullBulk, {}, 0, {}}; }
  static Reply array(std::vector<Reply> items) { return {Kind::Array, {}, 0, std::move(items)}; }
  static Reply null_array() { return {Kind::NullArray, {}, 0, {}}; }

  bool is_error() const noexcept { return kind == Kind::Error; }

  friend bool operator==(const Reply&, const Reply&) = default;
};

using Command = std::vector<std::string>;

/// Array of bulk strings, the only form clients send.
std::string encode_command(const Command& command);
void append_command(std::string& out, const Command& command);

std::string encode_reply(const Reply& reply);
void append_reply(std::string& out, const Reply& reply);

/// Decodes one reply from the front of `buffer`. Returns std::nullopt when
/// the buffer holds only a prefix of a frame; otherwise sets `consumed`.
/// Throws Errc::ProtocolError for malformed frames.
std::optional<Reply> try_decode(std::string_view buffer, std::size_t& consumed);

/// Decodes exactly one complete frame; throws ProtocolError on trailing or
/// missing bytes.
Reply decode(std::string_view frame);

/// Server side: a decoded frame must be a non-empty array of bulk strings.
Command to_command(const Reply& frame);

std::string describe(const Reply& reply);

}  // namespace flexstate::resp
