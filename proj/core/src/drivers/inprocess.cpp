#include <algorithm>
#include <thread>

#include "flexstate/drivers/drivers.hpp"
#include "flexstate/error.hpp"

namespace flexstate {

namespace {

class FlatKvsSession final : public StoreSession {
 public:
  FlatKvsSession(flat::FlatKeyspaceStore& store, std::uint64_t id) : store_(store), id_(id) {}

  std::uint64_t id() const noexcept override { return id_; }

  void apply(const MutationBatch& batch) override {
    if (batch.empty()) return;
    for (const auto& item : batch.items) {
      if (!mutation_fits(item.key.type, item.op)) {
        throw Error(Errc::ProtocolError, describe(item.op) + " on " + item.key.render());
      }
    }
    auto replies = store_.execute_batch(id_, batch.sequence, flat::commands_for(batch));
    if (!replies) return;  // duplicate of an applied batch
    for (const auto& r : *replies) {
      if (r.is_error()) throw Error(Errc::ProtocolError, r.text);
    }
  }

  Snapshot fetch(const StoreKey& key) override {
    return flat::snapshot_from_reply(key.type, store_.execute(flat::fetch_command(key)));
  }

  ScanResult scan_prefix(std::string_view nf_id, std::string_view instance_id) override {
    auto keys = store_.execute({"KEYS", flat::prefix_pattern(instance_prefix(nf_id, instance_id))});
    ScanResult out;
    for (const auto& k : keys.elements) {
      StoreKey key;
      try {
        key = parse_key(k.text);
      } catch (const Error&) {
        continue;  // foreign key sharing the prefix
      }
      auto snap = fetch(key);
      if (!is_absent(snap)) out.emplace_back(std::move(key), std::move(snap));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

 private:
  flat::FlatKeyspaceStore& store_;
  std::uint64_t id_;
};

class TableStoreSession final : public StoreSession {
 public:
  TableStoreSession(table::TableStore& store, std::uint64_t id) : store_(store), id_(id) {}

  std::uint64_t id() const noexcept override { return id_; }
  void apply(const MutationBatch& batch) override {
    if (!batch.empty()) store_.apply(id_, batch);
  }
  Snapshot fetch(const StoreKey& key) override { return store_.select(key); }
  ScanResult scan_prefix(std::string_view nf_id, std::string_view instance_id) override {
    return store_.scan(nf_id, instance_id);
  }

 private:
  table::TableStore& store_;
  std::uint64_t id_;
};

class LatencySession final : public StoreSession {
 public:
  LatencySession(std::unique_ptr<StoreSession> inner, std::chrono::microseconds latency)
      : inner_(std::move(inner)), latency_(latency) {}

  std::uint64_t id() const noexcept override { return inner_->id(); }
  void apply(const MutationBatch& batch) override {
    if (batch.empty()) return;
    delay();
    inner_->apply(batch);
  }
  Snapshot fetch(const StoreKey& key) override {
    delay();
    return inner_->fetch(key);
  }
  ScanResult scan_prefix(std::string_view nf_id, std::string_view instance_id) override {
    delay();
    return inner_->scan_prefix(nf_id, instance_id);
  }

 private:
  void delay() const {
    if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
  }

  std::unique_ptr<StoreSession> inner_;
  std::chrono::microseconds latency_;
};

bool consume(std::atomic<int>& counter) {
  int n = counter.load();
  while (n > 0) {
    if (counter.compare_exchange_weak(n, n - 1)) return true;
  }
  return false;
}

class FaultySession final : public StoreSession {
 public:
  FaultySession(std::unique_ptr<StoreSession> inner, std::shared_ptr<FaultPlan> plan)
      : inner_(std::move(inner)), plan_(std::move(plan)) {}

  std::uint64_t id() const noexcept override { return inner_->id(); }

  void apply(const MutationBatch& batch) override {
    if (plan_->store_down.load() || consume(plan_->fail_before_apply)) {
      fail("injected failure before apply");
    }
    inner_->apply(batch);
    if (consume(plan_->fail_after_apply)) fail("injected failure after apply");
  }
  Snapshot fetch(const StoreKey& key) override {
    if (plan_->store_down.load()) fail("injected failure on fetch");
    return inner_->fetch(key);
  }
  ScanResult scan_prefix(std::string_view nf_id, std::string_view instance_id) override {
    if (plan_->store_down.load()) fail("injected failure on scan");
    return inner_->scan_prefix(nf_id, instance_id);
  }

 private:
  [[noreturn]] void fail(const char* what) {
    plan_->injected.fetch_add(1);
    throw Error(Errc::ConnectionLost, what);
  }

  std::unique_ptr<StoreSession> inner_;
  std::shared_ptr<FaultPlan> plan_;
};

}  // namespace

std::unique_ptr<StoreSession> FlatKvsDriver::open_session() {
  return std::make_unique<FlatKvsSession>(store_, next_session_.fetch_add(1));
}

std::unique_ptr<StoreSession> TableStoreDriver::open_session() {
  return std::make_unique<TableStoreSession>(store_, next_session_.fetch_add(1));
}

std::unique_ptr<StoreSession> LatencyDriver::open_session() {
  return std::make_unique<LatencySession>(inner_.open_session(), latency_);
}

std::unique_ptr<StoreSession> FaultyDriver::open_session() {
  return std::make_unique<FaultySession>(inner_.open_session(), plan_);
}

}  // namespace flexstate
