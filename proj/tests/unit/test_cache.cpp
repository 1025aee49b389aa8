#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <flexstate/api.hpp>
#include <flexstate/cache.hpp>
#include <flexstate/drivers/drivers.hpp>
#include <flexstate/error.hpp>

#include "gen.hpp"
#include "model_store.hpp"

using namespace flexstate;
using namespace std::chrono_literals;

namespace {

CacheOptions fast_options() {
  CacheOptions o;
  o.flush_interval = 1ms;
  o.backoff_base = 1ms;
  o.backoff_cap = 4ms;
  return o;
}

}  // namespace

TEST(Cache, CounterAddsCoalesce) {
  fstest::ModelDriver d;
  CoreCache cache("nf", "i", 0, d, fast_options());
  StateContext ctx(cache);
  auto c = ctx.counter("c");
  for (int i = 0; i < 1000; ++i) c.add_nowait(1);
  ASSERT_EQ(cache.pending_size(), 1u);
  auto b = cache.pending_batch();
  EXPECT_EQ(std::get<mut::Incr>(b.items[0].op).delta, 1000);
  c.update_nowait(5);
  c.add_nowait(2);
  b = cache.pending_batch();
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(std::get<mut::CounterSet>(b.items[0].op).value, 7);
}

TEST(Cache, EntryWritesCoalescePerKey) {
  fstest::ModelDriver d;
  CoreCache cache("nf", "i", 0, d, fast_options());
  StateContext ctx(cache);
  auto m = ctx.map("m");
  m.insert_nowait("a", "1");
  m.insert_nowait("a", "2");
  m.insert_nowait("b", "1");
  m.remove_nowait("b");
  EXPECT_EQ(cache.pending_size(), 2u);
  auto cm = ctx.counter_map("cm");
  cm.add_to_nowait("x", 1);
  cm.add_to_nowait("x", 1);
  cm.remove_nowait("x");
  cm.add_to_nowait("x", 3);
  auto b = cache.pending_batch();
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(std::get<mut::CounterMapSet>(b.items[2].op), (mut::CounterMapSet{"x", 3}));
}

TEST(Cache, ListAppendsAreKeptInOrder) {
  fstest::ModelDriver d;
  CoreCache cache("nf", "i", 0, d, fast_options());
  StateContext ctx(cache);
  auto l = ctx.list("l");
  l.push_back_nowait("a");
  l.push_back_nowait("b");
  l.clear_nowait();
  l.push_back_nowait("c");
  EXPECT_EQ(cache.pending_size(), 4u);
  cache.flush_now_and_drain();
  EXPECT_EQ(d.model.fetch(l.key()), Snapshot(ListValue{"c"}));
}

TEST(Cache, HydratesFromStore) {
  FlatKvsDriver d;
  {
    CoreCache cache("nf", "i", 2, d, fast_options());
    StateContext ctx(cache);
    ctx.counter("c").add(41);
    ctx.set("s").insert("x");
  }
  CoreCache again("nf", "i", 2, d, fast_options());
  StateContext ctx(again);
  EXPECT_EQ(ctx.counter("c").read(), 41);
  EXPECT_TRUE(ctx.set("s").contains("x"));
  EXPECT_EQ(again.pending_size(), 0u);
}

TEST(Cache, TypeConflict) {
  fstest::ModelDriver d;
  CoreCache cache("nf", "i", 0, d, fast_options());
  StateContext ctx(cache);
  ctx.counter("x");
  try {
    ctx.map("x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TypeConflict);
  }
  EXPECT_THROW(ctx.counter("bad@id"), Error);
}

TEST(Cache, EmptyFlushesAreSkipped) {
  fstest::ModelDriver d;
  CoreCache cache("nf", "i", 0, d, fast_options());
  for (int i = 0; i < 20; ++i) {
    cache.tick();
    std::this_thread::sleep_for(1ms);
  }
  EXPECT_EQ(cache.stats().flushes_attempted, 0u);
}

TEST(Cache, TickFlushesAtInterval) {
  fstest::ModelDriver d;
  CoreCache cache("nf", "i", 0, d, fast_options());
  StateContext ctx(cache);
  auto c = ctx.counter("c");
  const auto end = std::chrono::steady_clock::now() + 200ms;
  while (std::chrono::steady_clock::now() < end) {
    c.add_nowait(1);
    cache.tick();
  }
  const auto n = cache.stats().flushes_succeeded;
  EXPECT_GT(n, 100u);
  EXPECT_LE(n, 202u);
  cache.flush_now_and_drain();
  EXPECT_EQ(d.model.fetch(c.key()), Snapshot(c.read()));
}

TEST(Cache, BackpressureAtLimit) {
  fstest::ModelDriver d;
  auto o = fast_options();
  o.backpressure_limit = 8;
  CoreCache cache("nf", "i", 0, d, o);
  StateContext ctx(cache);
  auto l = ctx.list("l");
  for (int i = 0; i < 8; ++i) l.push_back_nowait("x");
  try {
    l.push_back_nowait("y");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Backpressure);
  }
  EXPECT_EQ(l.len(), 8u);  // the failed call left no trace
  EXPECT_EQ(cache.stats().backpressure_events, 1u);
  cache.flush_sync();
  EXPECT_NO_THROW(l.push_back_nowait("y"));
}

TEST(Cache, RetriesThroughTransientFailures) {
  FlatKvsDriver inner;
  auto plan = std::make_shared<FaultPlan>();
  FaultyDriver faulty(inner, plan);
  CoreCache cache("nf", "i", 0, faulty, fast_options());
  StateContext ctx(cache);
  auto c = ctx.counter("c");
  plan->fail_before_apply = 2;
  plan->fail_after_apply = 1;
  EXPECT_EQ(c.add(3), 3);
  EXPECT_EQ(inner.open_session()->fetch(c.key()), Snapshot(std::int64_t{3}));  // applied exactly once
  EXPECT_EQ(cache.stats().retries, 3u);
}

TEST(Cache, WaitingCallReportsStoreUnavailable) {
  FlatKvsDriver inner;
  auto plan = std::make_shared<FaultPlan>();
  FaultyDriver faulty(inner, plan);
  CoreCache cache("nf", "i", 0, faulty, fast_options());
  StateContext ctx(cache);
  auto c = ctx.counter("c");
  plan->store_down = true;
  try {
    c.add(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::StoreUnavailable);
  }
  EXPECT_EQ(c.read(), 1);  // live state kept, mutation still pending
  plan->store_down = false;
  cache.flush_now_and_drain();
  EXPECT_EQ(inner.open_session()->fetch(c.key()), Snapshot(std::int64_t{1}));
}

TEST(Cache, DrainFailureWritesDump) {
  FlatKvsDriver inner;
  auto plan = std::make_shared<FaultPlan>();
  FaultyDriver faulty(inner, plan);
  auto o = fast_options();
  o.dump_directory = std::filesystem::temp_directory_path();
  CoreCache cache("nf", "i", 5, faulty, o);
  StateContext ctx(cache);
  ctx.counter("c").add_nowait(9);
  plan->store_down = true;
  try {
    cache.flush_now_and_drain();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConnectionLost);
  }
  ASSERT_TRUE(cache.last_dump_path());
  std::ifstream in(*cache.last_dump_path());
  std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(text.find("nf@i@5@Counter@c"), std::string::npos);
  std::filesystem::remove(*cache.last_dump_path());
  plan->store_down = false;
}

// Random API traffic with random flush points: after drain the store holds
// exactly the live state, for every structure.
TEST(Cache, ConvergenceProperty) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    fstest::Gen g(seed);
    fstest::ModelDriver d;
    CoreCache cache("nf", "i", 0, d, fast_options());
    StateContext ctx(cache);
    auto pool = fstest::entry_pool(g, 6);
    std::vector<AnyHandle> handles;
    for (auto t : kAllStructureTypes) {
      for (int i = 0; i < 2; ++i) handles.push_back(ctx.create_structure(t, g.token(1, 6) + std::to_string(i)));
    }
    for (int step = 0; step < 3000; ++step) {
      auto& h = handles[g.index(handles.size())];
      const auto& e = g.pick(pool);
      const bool wait = g.chance(0.02);
      try {
        std::visit(
            [&](auto& x) {
              using H = std::decay_t<decltype(x)>;
              if constexpr (std::is_same_v<H, Counter>) {
                if (g.chance(0.1)) x.update_nowait(g.range(-9, 9));
                else if (g.chance(0.05)) x.erase_nowait();
                else if (wait) x.add(g.range(-3, 3));
                else x.add_nowait(g.range(-3, 3));
              } else if constexpr (std::is_same_v<H, NameValue>) {
                if (g.chance(0.2)) x.erase_nowait();
                else x.create_nowait(g.bytes(0, 8));
              } else if constexpr (std::is_same_v<H, Map>) {
                if (g.chance(0.3)) x.remove_nowait(e);
                else if (g.chance(0.03)) x.clear_nowait();
                else if (wait) x.insert(e, g.bytes(0, 6));
                else x.insert_nowait(e, g.bytes(0, 6));
              } else if constexpr (std::is_same_v<H, CounterMap>) {
                if (g.chance(0.2)) x.remove_nowait(e);
                else if (g.chance(0.1)) x.insert_nowait(e, g.range(-5, 5));
                else if (g.chance(0.03)) x.clear_nowait();
                else x.add_to_nowait(e, g.range(-3, 3));
              } else if constexpr (std::is_same_v<H, List>) {
                if (g.chance(0.05)) x.clear_nowait();
                else x.push_back_nowait(e);
              } else {
                if (g.chance(0.4)) x.remove_nowait(e);
                else if (g.chance(0.03)) x.clear_nowait();
                else x.insert_nowait(e);
              }
            },
            h);
      } catch (const Error& err) {
        ASSERT_EQ(err.code(), Errc::NotFound);
      }
      if (g.chance(0.05)) cache.tick(std::chrono::steady_clock::now() + 1h);
    }
    cache.flush_now_and_drain();
    for (const auto* s : cache.structures()) {
      ASSERT_EQ(d.model.fetch(s->key), to_snapshot(s->value)) << "seed " << seed << " " << s->key.render();
    }
  }
}
