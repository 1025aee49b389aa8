#include <gtest/gtest.h>

#include <map>
#include <set>

#include <flexstate/error.hpp>
#include <flexstate/trafficgen.hpp>

using namespace flexstate;

TEST(TrafficGen, DeterministicUniqueInRange) {
  TrafficSpec spec;
  auto a = generate_flows(spec);
  auto b = generate_flows(spec);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 50'000u);
  std::set<FlowKey> unique(a.flows().begin(), a.flows().end());
  EXPECT_EQ(unique.size(), 50'000u);
  for (const auto& f : a.flows()) {
    ASSERT_EQ(f.src_ip >> 17, 0xC6120000u >> 17);
    ASSERT_EQ(f.dst_ip >> 17, 0xC6120000u >> 17);
    ASSERT_EQ(f.proto, 6);
  }
  spec.seed = 2;
  EXPECT_NE(generate_flows(spec), a);
}

TEST(TrafficGen, FileRoundTrip) {
  TrafficSpec spec;
  spec.n_flows = 500;
  auto f = generate_flows(spec);
  const auto text = f.render();
  EXPECT_EQ(text.rfind("flexstate-flows v1\n", 0), 0u);
  EXPECT_EQ(FlowFile::parse(text), f);
  auto path = std::filesystem::temp_directory_path() / "flexstate_flows_test.txt";
  f.save(path);
  EXPECT_EQ(FlowFile::load(path), f);
  std::filesystem::remove(path);
}

TEST(TrafficGen, ParseErrors) {
  auto code = [](std::string_view text) {
    try {
      FlowFile::parse(text);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidArgument;
  };
  EXPECT_EQ(code(""), Errc::ParseError);
  EXPECT_EQ(code("flexstate-flows v1\n"), Errc::ParseError);
  EXPECT_EQ(code("flows\n1.2.3.4,1.2.3.5,1,2,6\n"), Errc::ParseError);
  EXPECT_EQ(code("flexstate-flows v1\n1.2.3.4,1.2.3.5,1,2\n"), Errc::ParseError);
  EXPECT_EQ(code("flexstate-flows v1\n1.2.3.4,1.2.3.5,1,70000,6\n"), Errc::ParseError);
  EXPECT_EQ(code("flexstate-flows v1\n1.2.3.4,1.2.3.5,1,2,6\n1.2.3.4,1.2.3.5,1,2,6\n"), Errc::ParseError);
  EXPECT_EQ(code("flexstate-flows v1\n1.2.3.4,1.2.3.5,1,2,6,7\n"), Errc::ParseError);
}

TEST(TrafficGen, ReplayCyclesInOrder) {
  TrafficSpec spec;
  spec.n_flows = 50'000;
  spec.packet_budget = 100'000;
  auto f = generate_flows(spec);
  ReplaySource src(f, spec);
  std::map<FlowKey, int> count;
  Packet p;
  std::size_t i = 0;
  while (src.next(p)) {
    ASSERT_EQ(p.flow, f.flows()[i % f.size()]);
    ASSERT_EQ(p.size, 64u);
    ++count[p.flow];
    ++i;
  }
  EXPECT_EQ(i, 100'000u);
  for (const auto& [flow, n] : count) ASSERT_EQ(n, 2);
}

TEST(TrafficGen, ReplayByDuration) {
  TrafficSpec spec;
  spec.n_flows = 10;
  spec.duration = std::chrono::milliseconds(20);
  auto f = generate_flows(spec);
  ReplaySource src(f, spec);
  Packet p;
  const auto t0 = std::chrono::steady_clock::now();
  while (src.next(p)) {
  }
  EXPECT_GE(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(20));
  EXPECT_GT(src.emitted(), 0u);
}

TEST(TrafficGen, Validation) {
  TrafficSpec spec;
  spec.packet_size = 53;
  EXPECT_THROW(generate_flows(spec), Error);
  spec.packet_size = 64;
  spec.n_flows = 0;
  EXPECT_THROW(generate_flows(spec), Error);
  EXPECT_THROW(ReplaySource(FlowFile{}, TrafficSpec{}), Error);
}
