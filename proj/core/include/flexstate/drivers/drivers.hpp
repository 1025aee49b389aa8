#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "flexstate/drivers/flat_store.hpp"
#include "flexstate/drivers/table_store.hpp"
#include "flexstate/store.hpp"

namespace flexstate {

/// In-process flat-keyspace store ("flatkvs"). Batches are translated to
/// the same commands the network driver sends and executed in-process.
class FlatKvsDriver final : public StoreDriver {
 public:
  std::string_view label() const noexcept override { return "flatkvs"; }
  std::unique_ptr<StoreSession> open_session() override;

  flat::FlatKeyspaceStore& store() noexcept { return store_; }

 private:
  flat::FlatKeyspaceStore store_;
  std::atomic<std::uint64_t> next_session_{1};
};

/// In-process table-organised store ("tablestore").
class TableStoreDriver final : public StoreDriver {
 public:
  std::string_view label() const noexcept override { return "tablestore"; }
  std::unique_ptr<StoreSession> open_session() override;

  table::TableStore& store() noexcept { return store_; }

 private:
  table::TableStore store_;
  std::atomic<std::uint64_t> next_session_{1};
};

/// RESP2-over-TCP driver ("resp"). Each session owns one connection and
/// reconnects lazily after a ConnectionLost.
class RespDriver final : public StoreDriver {
 public:
  RespDriver(std::string host, std::uint16_t port,
             std::chrono::milliseconds io_timeout = std::chrono::seconds(5));
  /// Parses "host:port"; throws Errc::InvalidArgument.
  static std::unique_ptr<RespDriver> from_endpoint(std::string_view endpoint);

  std::string_view label() const noexcept override { return "resp"; }
  std::unique_ptr<StoreSession> open_session() override;

  const std::string& host() const noexcept { return host_; }
  std::uint16_t port() const noexcept { return port_; }

 private:
  std::string host_;
  std::uint16_t port_;
  std::chrono::milliseconds io_timeout_;
};

/// Adds a fixed delay to every store round trip (apply, fetch, scan) of the
/// wrapped driver's sessions, emulating a remote store.
class LatencyDriver final : public StoreDriver {
 public:
  LatencyDriver(StoreDriver& inner, std::chrono::microseconds latency)
      : inner_(inner), latency_(latency) {}

  std::string_view label() const noexcept override { return inner_.label(); }
  std::unique_ptr<StoreSession> open_session() override;

 private:
  StoreDriver& inner_;
  std::chrono::microseconds latency_;
};

/// Shared switchboard for FaultyDriver sessions. Each counter is consumed
/// by the next apply() calls of any session.
struct FaultPlan {
  /// apply() throws ConnectionLost without reaching the store.
  std::atomic<int> fail_before_apply{0};
  /// apply() reaches the store, then throws ConnectionLost (lost ack).
  std::atomic<int> fail_after_apply{0};
  /// Every apply() and fetch() fails while set.
  std::atomic<bool> store_down{false};
  std::atomic<std::uint64_t> injected{0};
};

class FaultyDriver final : public StoreDriver {
 public:
  FaultyDriver(StoreDriver& inner, std::shared_ptr<FaultPlan> plan)
      : inner_(inner), plan_(std::move(plan)) {}

  std::string_view label() const noexcept override { return inner_.label(); }
  std::unique_ptr<StoreSession> open_session() override;

 private:
  StoreDriver& inner_;
  std::shared_ptr<FaultPlan> plan_;
};

}  // namespace flexstate
