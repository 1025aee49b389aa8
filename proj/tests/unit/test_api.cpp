#include <gtest/gtest.h>

#include <flexstate/api.hpp>
#include <flexstate/drivers/drivers.hpp>
#include <flexstate/error.hpp>

#include "model_store.hpp"

using namespace flexstate;
using namespace std::chrono_literals;

class Api : public ::testing::Test {
 protected:
  fstest::ModelDriver driver;
  CoreCache cache{"nf1", "ins1", 1, driver};
  StateContext ctx{cache};

  Snapshot stored(const detail::HandleBase& h) { return driver.model.fetch(h.key()); }
};

TEST_F(Api, CounterWaitingFormReachesStore) {
  auto c = ctx.counter("pktCounter");
  EXPECT_EQ(c.key().render(), "nf1@ins1@1@Counter@pktCounter");
  EXPECT_EQ(c.read(), 0);
  EXPECT_FALSE(c.exists());
  EXPECT_EQ(c.add(5), 5);
  EXPECT_EQ(stored(c), Snapshot(std::int64_t{5}));
  c.add_nowait(2);
  EXPECT_EQ(c.read(), 7);
  EXPECT_EQ(stored(c), Snapshot(std::int64_t{5}));  // not yet flushed
  c.update(1);
  EXPECT_EQ(stored(c), Snapshot(std::int64_t{1}));
  c.erase();
  EXPECT_TRUE(is_absent(stored(c)));
  EXPECT_EQ(c.read(), 0);
}

TEST_F(Api, CounterOverflow) {
  auto c = ctx.counter("c");
  c.update_nowait(std::numeric_limits<std::int64_t>::max());
  try {
    c.add_nowait(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Overflow);
  }
  EXPECT_EQ(c.read(), std::numeric_limits<std::int64_t>::max());
}

TEST_F(Api, NameValueCrud) {
  auto v = ctx.name_value("cfg");
  EXPECT_FALSE(v.read());
  try {
    v.update("x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotFound);
  }
  v.create(std::string("a\0b", 3));
  EXPECT_EQ(stored(v), Snapshot(Blob("a\0b", 3)));
  v.update("c");
  EXPECT_EQ(*v.read(), "c");
  v.erase();
  EXPECT_TRUE(is_absent(stored(v)));
  EXPECT_THROW(v.erase(), Error);
  EXPECT_THROW(v.create(std::string(kMaxBlobBytes + 1, 'x')), Error);
}

TEST_F(Api, MapOperations) {
  auto m = ctx.map("nat");
  m.insert("k1", "v1");
  m.insert_nowait("k2", "v2");
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(*m.get("k1"), "v1");
  EXPECT_FALSE(m.get("k3"));
  EXPECT_TRUE(m.remove("k1"));
  EXPECT_FALSE(m.remove("k1"));
  EXPECT_EQ(stored(m), Snapshot(MapValue{{"k2", "v2"}}));
  m.clear();
  EXPECT_TRUE(is_absent(stored(m)));
  EXPECT_THROW(m.insert("", "x"), Error);
}

TEST_F(Api, CounterMapOperations) {
  auto cm = ctx.counter_map("load");
  EXPECT_EQ(cm.add_to("A", 1), 1);
  EXPECT_EQ(cm.add_to_nowait("A", 2), 3);
  cm.insert("B", 10);
  EXPECT_EQ(cm.get("A"), 3);
  EXPECT_FALSE(cm.get("C"));
  EXPECT_EQ(stored(cm), Snapshot(CounterMapValue{{"A", 3}, {"B", 10}}));
  cm.remove("A");
  EXPECT_EQ(stored(cm), Snapshot(CounterMapValue{{"B", 10}}));
}

TEST_F(Api, ListAndSet) {
  auto l = ctx.list("log");
  l.push_back("a");
  l.push_back("b");
  EXPECT_EQ(l.get(1), "b");
  EXPECT_THROW(l.get(2), Error);
  EXPECT_EQ(stored(l), Snapshot(ListValue{"a", "b"}));
  l.clear();
  EXPECT_EQ(l.len(), 0u);

  auto s = ctx.set("seen");
  EXPECT_TRUE(s.insert("x"));
  EXPECT_FALSE(s.insert("x"));
  EXPECT_TRUE(s.contains("x"));
  EXPECT_EQ(stored(s), Snapshot(SetValue{"x"}));
  EXPECT_TRUE(s.remove("x"));
  EXPECT_TRUE(is_absent(stored(s)));
}

TEST_F(Api, HandlesAlias) {
  auto a = ctx.counter("c");
  auto b = ctx.counter("c");
  a.add_nowait(3);
  EXPECT_EQ(b.read(), 3);
}

TEST(ApiPartitioning, CoresDoNotShareState) {
  FlatKvsDriver driver;
  CoreCache c0("nf1", "ins1", 0, driver);
  CoreCache c1("nf1", "ins1", 1, driver);
  StateContext a(c0), b(c1);
  a.counter("x").add(1);
  b.counter("x").add(10);
  EXPECT_EQ(a.counter("x").read(), 1);
  EXPECT_EQ(b.counter("x").read(), 10);
  auto s = driver.open_session();
  EXPECT_EQ(s->fetch(build_key("nf1", "ins1", 0, StructureType::Counter, "x")), Snapshot(std::int64_t{1}));
  EXPECT_EQ(s->fetch(build_key("nf1", "ins1", 1, StructureType::Counter, "x")), Snapshot(std::int64_t{10}));
}

TEST(ApiPortability, SameCodeAnyDriver) {
  for (const auto* label : {"flatkvs", "tablestore"}) {
    auto driver = DriverRegistry::defaults().create(label, "local");
    CoreCache cache("nf1", "ins1", 0, *driver);
    StateContext ctx(cache);
    ctx.counter("c").add(2);
    ctx.counter_map("m").add_to("k", 3);
    ctx.list("l").push_back("x");
    auto s = driver->open_session();
    EXPECT_EQ(s->scan_prefix("nf1", "ins1").size(), 3u) << label;
  }
}
