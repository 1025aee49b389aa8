#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "flexstate/drivers/flat_store.hpp"

namespace flexstate {

/// Minimal RESP2 server over an in-memory FlatKeyspaceStore. Serves the
/// subset SET GET DEL EXISTS INCRBY HSET HGET HDEL HINCRBY HGETALL HLEN
/// SADD SREM SMEMBERS SISMEMBER RPUSH LRANGE LLEN KEYS DBSIZE PING FLUSHALL
/// plus MULTI / EXEC / EXECSEQ / DISCARD, one thread per connection.
///
/// EXECSEQ <session> <sequence> behaves like EXEC but applies the queued
/// commands at most once per (session, sequence); a duplicate gets a null
/// array reply.
class MiniRespServer {
 public:
  /// Binds and starts serving; port 0 picks a free port. Throws BindFailure.
  static std::unique_ptr<MiniRespServer> start(std::uint16_t port, std::string host = "127.0.0.1");

  ~MiniRespServer();
  MiniRespServer(const MiniRespServer&) = delete;
  MiniRespServer& operator=(const MiniRespServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  std::string endpoint() const { return host_ + ":" + std::to_string(port_); }
  flat::FlatKeyspaceStore& store() noexcept { return store_; }

  /// Forcibly closes every client connection (fault injection).
  void drop_connections();
  void stop();
  std::uint64_t commands_served() const noexcept { return commands_.load(); }

 private:
  MiniRespServer() = default;
  void accept_loop();
  void serve(int fd);

  struct Client {
    int fd;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  flat::FlatKeyspaceStore store_;
  std::string host_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex clients_mutex_;
  std::list<Client> clients_;
  std::atomic<std::uint64_t> commands_{0};
};

}  // namespace flexstate
