// Built against the library variant with FLEXSTATE_CHECK_OWNERSHIP.
#include <gtest/gtest.h>

#include <thread>

#include <flexstate/api.hpp>
#include <flexstate/error.hpp>

#include "model_store.hpp"

using namespace flexstate;

TEST(Ownership, ForeignThreadIsRejected) {
  fstest::ModelDriver driver;
  CoreCache cache("nf", "i", 0, driver);
  StateContext ctx(cache);
  auto c = ctx.counter("c");
  std::thread([&] { cache.bind_owner(); }).join();

  try {
    c.add_nowait(1);
    FAIL() << "expected WrongCore";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WrongCore);
  }
  EXPECT_THROW((void)c.read(), Error);
}

TEST(Ownership, OwnerThreadIsAccepted) {
  fstest::ModelDriver driver;
  CoreCache cache("nf", "i", 0, driver);
  std::thread([&] {
    cache.bind_owner();
    StateContext ctx(cache);
    auto c = ctx.counter("c");
    c.add(2);
    EXPECT_EQ(c.read(), 2);
  }).join();
}
