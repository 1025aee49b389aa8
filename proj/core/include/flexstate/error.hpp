#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flexstate {

enum class Errc {
  InvalidId,
  InvalidToken,
  TypeConflict,
  StoreUnavailable,
  Overflow,
  NotFound,
  KeyTooLarge,
  ValueTooLarge,
  IndexOutOfRange,
  SyntaxError,
  UnknownDriver,
  MissingField,
  BadDuration,
  ConnectionLost,
  ProtocolError,
  BindFailure,
  Backpressure,
  QueueOverflow,
  PoolExhausted,
  EmptyServerList,
  ParseError,
  WrongCore,
  InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers can branch on the category without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace flexstate
