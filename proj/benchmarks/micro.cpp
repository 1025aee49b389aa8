#include <benchmark/benchmark.h>

#include <flexstate/api.hpp>
#include <flexstate/cache.hpp>
#include <flexstate/drivers/drivers.hpp>
#include <flexstate/drivers/resp.hpp>
#include <flexstate/key.hpp>
#include <flexstate/runtime.hpp>

using namespace flexstate;

namespace {

void BM_RssHash(benchmark::State& state) {
  FlowKey f{0xC6120001u, 0xC6130002u, 1024, 80, 6};
  std::uint32_t acc = 0;
  for (auto _ : state) {
    acc += rss_hash(f, 8);
    ++f.src_port;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_RssHash);

void BM_KeyRoundTrip(benchmark::State& state) {
  const auto key = build_key("nf1", "ins1", 3, StructureType::CounterMap, "lb_load");
  for (auto _ : state) {
    auto k = parse_key(key.render());
    benchmark::DoNotOptimize(k);
  }
}
BENCHMARK(BM_KeyRoundTrip);

void BM_RespEncodeDecode(benchmark::State& state) {
  const resp::Command cmd = {"HSET", "nf1@ins1@0@Map@nat_bindings", std::string(13, 'k'), std::string(6, 'v')};
  for (auto _ : state) {
    auto wire = resp::encode_command(cmd);
    auto back = resp::to_command(resp::decode(wire));
    benchmark::DoNotOptimize(back);
  }
}
BENCHMARK(BM_RespEncodeDecode);

void BM_FlatStoreApply(benchmark::State& state) {
  FlatKvsDriver driver;
  auto session = driver.open_session();
  MutationBatch batch;
  for (int i = 0; i < state.range(0); ++i) {
    batch.items.push_back({build_key("nf1", "ins1", 0, StructureType::Counter, "c" + std::to_string(i % 16)),
                           mut::Incr{1}});
  }
  for (auto _ : state) {
    ++batch.sequence;
    session->apply(batch);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FlatStoreApply)->Arg(1)->Arg(64);

void BM_CounterAddNowait(benchmark::State& state) {
  FlatKvsDriver driver;
  CoreCache cache("nf1", "ins1", 0, driver);
  StateContext ctx(cache);
  auto counter = ctx.counter("pkt");
  for (auto _ : state) {
    counter.add_nowait(1);
    ctx.tick();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CounterAddNowait);

}  // namespace

BENCHMARK_MAIN();
