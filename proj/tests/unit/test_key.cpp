#include <gtest/gtest.h>

#include <flexstate/error.hpp>
#include <flexstate/key.hpp>

#include "gen.hpp"

using namespace flexstate;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;  // sentinel: nothing thrown
}

}  // namespace

TEST(Key, RendersSchema) {
  auto k = build_key("nf1", "ins1", 3, StructureType::Counter, "pktCounter");
  EXPECT_EQ(k.render(), "nf1@ins1@3@Counter@pktCounter");
  EXPECT_EQ(k.partition(), "nf1@ins1@3");
  EXPECT_EQ(build_key("a", "b", 0, StructureType::CounterMap, "x").render(), "a@b@0@Countermap@x");
  EXPECT_EQ(instance_prefix("nf1", "ins1"), "nf1@ins1@");
}

TEST(Key, TypeTokens) {
  for (auto t : kAllStructureTypes) EXPECT_EQ(parse_type_token(type_token(t)), t);
  EXPECT_FALSE(parse_type_token("counter").has_value());
  EXPECT_FALSE(parse_type_token("").has_value());
}

TEST(Key, RejectsBadTokens) {
  EXPECT_EQ(code_of([] { build_key("", "i", 0, StructureType::Counter, "x"); }), Errc::InvalidToken);
  EXPECT_EQ(code_of([] { build_key("n@f", "i", 0, StructureType::Counter, "x"); }), Errc::InvalidToken);
  EXPECT_EQ(code_of([] { build_key("nf", "i i", 0, StructureType::Counter, "x"); }), Errc::InvalidToken);
  EXPECT_EQ(code_of([] { build_key("nf", "i", 0, StructureType::Counter, "a@b"); }), Errc::InvalidId);
  EXPECT_EQ(code_of([] { build_key("nf", "i", 0, StructureType::Counter, std::string(129, 'x')); }),
            Errc::InvalidId);
  EXPECT_NO_THROW(build_key("nf", "i", 0, StructureType::Counter, std::string(128, 'x')));
}

TEST(Key, ParseRejectsMalformed) {
  for (const char* bad : {"", "a@b@1@Counter", "a@b@1@Counter@x@y", "a@b@01@Counter@x", "a@b@-1@Counter@x",
                          "a@b@x@Counter@x", "a@b@1@Bogus@x", "@b@1@Counter@x", "a@b@1@Counter@",
                          "a@b@4294967296@Counter@x", "a@b@ 1@Counter@x", "a b@c@1@Counter@x"}) {
    EXPECT_EQ(code_of([&] { parse_key(bad); }), Errc::InvalidToken) << bad;
  }
  EXPECT_EQ(parse_key("a@b@0@Set@s").core_id, 0u);
}

TEST(Key, RoundTripProperty) {
  fstest::Gen g(7);
  for (int i = 0; i < 5000; ++i) {
    auto k = g.key();
    ASSERT_EQ(parse_key(k.render()), k) << k.render();
  }
}

TEST(Key, OrderingFollowsFields) {
  auto a = build_key("nf", "i", 1, StructureType::Counter, "z");
  auto b = build_key("nf", "i", 2, StructureType::Counter, "a");
  EXPECT_LT(a, b);
}
