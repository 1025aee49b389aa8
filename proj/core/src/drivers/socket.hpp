#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace flexstate::net {

/// Owning file descriptor.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& other) noexcept : fd_(other.release()) {}
  Fd& operator=(Fd&& other) noexcept;
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  int release() noexcept {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void reset() noexcept;

 private:
  int fd_ = -1;
};

/// Blocking TCP connect with send/receive timeouts; throws ConnectionLost.
Fd connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout);

/// Listening socket bound to host:port (port 0 picks a free port); throws BindFailure.
Fd listen_tcp(const std::string& host, std::uint16_t port);
std::uint16_t local_port(int fd);

/// Writes all bytes; returns false on error.
bool write_all(int fd, std::string_view data);
/// Reads available bytes into `buffer` (appends). Returns bytes read; 0 on EOF; -1 on error.
long read_some(int fd, std::string& buffer);

}  // namespace flexstate::net
