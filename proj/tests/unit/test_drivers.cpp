#include <gtest/gtest.h>

#include <thread>

#include <flexstate/drivers/drivers.hpp>
#include <flexstate/drivers/mini_server.hpp>
#include <flexstate/error.hpp>

#include "conformance.hpp"

using namespace flexstate;

TEST(Registry, DefaultsAndUnknown) {
  const auto& r = DriverRegistry::defaults();
  EXPECT_EQ(r.labels(), (std::vector<std::string>{"flatkvs", "resp", "tablestore"}));
  EXPECT_EQ(r.create("flatkvs", "local")->label(), "flatkvs");
  EXPECT_EQ(r.create("tablestore", "local")->label(), "tablestore");
  try {
    r.create("mongo", "local");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownDriver);
  }
  EXPECT_THROW(r.create("resp", "no-port"), Error);
}

TEST(Registry, CustomDriverPlugsIn) {
  DriverRegistry r;
  r.add("model", [](std::string_view) { return std::make_unique<fstest::ModelDriver>(); });
  EXPECT_TRUE(r.contains("model"));
  EXPECT_EQ(r.create("model", "")->label(), "model");
}

TEST(Conformance, InProcessDriversMatchModel) {
  FlatKvsDriver flat;
  TableStoreDriver table;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto a = flat.open_session();
    auto b = table.open_session();
    auto res = fstest::run_conformance(seed, 2000, "nf" + std::to_string(seed),
                                        {{"flatkvs", a.get()}, {"tablestore", b.get()}});
    ASSERT_EQ(res.divergences, 0u) << "seed " << seed << ": " << res.first_divergence;
  }
}

TEST(Conformance, RespAgainstMiniServer) {
  auto server = MiniRespServer::start(0);
  RespDriver resp("127.0.0.1", server->port());
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto s = resp.open_session();
    auto res = fstest::run_conformance(seed, 1500, "nf" + std::to_string(seed), {{"resp", s.get()}});
    ASSERT_EQ(res.divergences, 0u) << "seed " << seed << ": " << res.first_divergence;
  }
  EXPECT_GT(server->commands_served(), 0u);
}

TEST(RespDriver, SurvivesDroppedConnections) {
  auto server = MiniRespServer::start(0);
  auto driver = RespDriver::from_endpoint(server->endpoint());
  auto s = driver->open_session();
  const auto k = build_key("nf", "i", 0, StructureType::Counter, "c");
  s->apply({1, {{k, mut::Incr{1}}}});
  server->drop_connections();
  // the first call after the drop may see ConnectionLost; the retry reconnects
  for (int attempt = 0;; ++attempt) {
    try {
      s->apply({2, {{k, mut::Incr{1}}}});
      break;
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), Errc::ConnectionLost);
      ASSERT_LT(attempt, 3);
    }
  }
  EXPECT_EQ(s->fetch(k), Snapshot(std::int64_t{2}));
}

TEST(RespDriver, DuplicateBatchAppliedOnce) {
  auto server = MiniRespServer::start(0);
  RespDriver driver("127.0.0.1", server->port());
  auto s = driver.open_session();
  const auto k = build_key("nf", "i", 0, StructureType::Counter, "c");
  MutationBatch b{9, {{k, mut::Incr{5}}}};
  s->apply(b);
  s->apply(b);  // a resend after a lost ack
  EXPECT_EQ(s->fetch(k), Snapshot(std::int64_t{5}));
}

TEST(RespDriver, UnreachableStore) {
  RespDriver driver("127.0.0.1", 1, std::chrono::milliseconds(200));
  auto s = driver.open_session();
  try {
    s->fetch(build_key("nf", "i", 0, StructureType::Counter, "c"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConnectionLost);
  }
}

TEST(MiniServer, BindFailure) {
  auto a = MiniRespServer::start(0);
  try {
    MiniRespServer::start(a->port());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BindFailure);
  }
}

TEST(Faults, FailBeforeAndAfterApply) {
  for (auto* which : {"before", "after"}) {
    FlatKvsDriver inner;
    auto plan = std::make_shared<FaultPlan>();
    FaultyDriver faulty(inner, plan);
    auto s = faulty.open_session();
    const auto k = build_key("nf", "i", 0, StructureType::Counter, "c");
    (std::string_view(which) == "before" ? plan->fail_before_apply : plan->fail_after_apply) = 1;
    MutationBatch b{1, {{k, mut::Incr{1}}}};
    EXPECT_THROW(s->apply(b), Error);
    s->apply(b);  // retry of the same batch
    EXPECT_EQ(s->fetch(k), Snapshot(std::int64_t{1})) << which;
  }
}

TEST(Faults, StoreDown) {
  FlatKvsDriver inner;
  auto plan = std::make_shared<FaultPlan>();
  FaultyDriver faulty(inner, plan);
  auto s = faulty.open_session();
  plan->store_down = true;
  EXPECT_THROW(s->fetch(build_key("nf", "i", 0, StructureType::Counter, "c")), Error);
  plan->store_down = false;
  EXPECT_NO_THROW(s->fetch(build_key("nf", "i", 0, StructureType::Counter, "c")));
}

TEST(Latency, AddsDelayPerRoundTrip) {
  FlatKvsDriver inner;
  LatencyDriver slow(inner, std::chrono::microseconds(2000));
  auto s = slow.open_session();
  const auto k = build_key("nf", "i", 0, StructureType::Counter, "c");
  MutationBatch b{0, {}};
  for (int i = 0; i < 100; ++i) b.items.push_back({k, mut::Incr{1}});
  const auto t0 = std::chrono::steady_clock::now();
  s->apply(b);
  const auto dt = std::chrono::steady_clock::now() - t0;
  EXPECT_GE(dt, std::chrono::microseconds(2000));
  EXPECT_LT(dt, std::chrono::microseconds(2000 * 20));  // per batch, not per mutation
  EXPECT_EQ(s->fetch(k), Snapshot(std::int64_t{100}));
}

TEST(Sessions, ConcurrentSessionsDoNotInterfere) {
  auto server = MiniRespServer::start(0);
  RespDriver driver("127.0.0.1", server->port());
  const auto k = build_key("nf", "i", 0, StructureType::Counter, "c");
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      auto s = driver.open_session();
      for (std::uint64_t i = 1; i <= 200; ++i) s->apply({i, {{k, mut::Incr{1}}}});
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(driver.open_session()->fetch(k), Snapshot(std::int64_t{800}));
}
