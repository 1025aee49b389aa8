// End-to-end acceptance suite. Prints one line per criterion:
//   [PASS] / [FAIL] / [SKIP] <n> <name>: <measurements>
// Usage: acceptance [criterion numbers...]
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include <flexstate/config.hpp>
#include <flexstate/drivers/drivers.hpp>
#include <flexstate/drivers/mini_server.hpp>
#include <flexstate/error.hpp>
#include <flexstate/key.hpp>
#include <flexstate/nf/combine.hpp>
#include <flexstate/nf/counter.hpp>
#include <flexstate/runtime.hpp>
#include <flexstate/trafficgen.hpp>

#include "bench.hpp"
#include "conformance.hpp"
#include "gen.hpp"

using namespace flexstate;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

// Pinned thresholds.
constexpr std::uint64_t kConservationPackets = 1'000'000;
constexpr std::uint32_t kConservationCores = 8;
constexpr std::uint32_t kFlows = 50'000;
constexpr int kConformanceSequences = 100;
constexpr std::size_t kConformanceOps = 10'000;
constexpr auto kInjectedLatency = 100us;
constexpr double kAsyncSyncRatio = 5.0;
constexpr int kSeeds = 10;
constexpr double kDriverSpread = 0.15;  // each driver within 15% of the per-NF best
constexpr int kIndependenceSeeds = 6;
constexpr auto kIndependenceRun = 5s;  // long enough that the first-packet flush burst is amortized
constexpr double kScale4 = 2.0;
constexpr double kScale8 = 3.0;
constexpr unsigned kScalingMinThreads = 8;
constexpr std::uint64_t kNatPool = 65'536;
constexpr std::uint64_t kCadenceLow = 7'500;
constexpr std::uint64_t kCadenceHigh = 12'500;
constexpr auto kCadenceRun = 10s;
constexpr int kKeyRoundTrips = 100'000;

struct Outcome {
  enum Status { Pass, Fail, Skip } status = Fail;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)}; }

std::uint32_t best_cores() {
  return std::clamp(std::thread::hardware_concurrency(), 1u, 8u);
}

std::string fmt(double v, int prec = 0) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(prec);
  out << v;
  return out.str();
}

std::string failed_checks(const bench::BenchReport& r) {
  std::string out;
  for (const auto& rep : r.repetitions) {
    for (const auto& c : rep.checks) {
      if (!c.passed) out += " [seed " + std::to_string(rep.seed) + " " + c.name + ": " + c.detail + "]";
    }
  }
  return out;
}

// 1
Outcome conservation() {
  FlatKvsDriver driver;
  PoolOptions o;
  o.cores = kConservationCores;
  o.overflow = OverflowPolicy::Block;
  WorkerPool pool(driver, o);
  TrafficSpec spec;
  spec.n_flows = kFlows;
  spec.packet_budget = kConservationPackets;
  auto flows = generate_flows(spec);
  ReplaySource source(flows, spec);
  const auto t0 = std::chrono::steady_clock::now();
  auto run = pool.run([](StateContext& ctx) { return std::make_unique<nf::AsyncCounter>(ctx); }, source);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto session = driver.open_session();
  const auto total = nf::combine_counters(*session, o.nf_id, {o.instance_id}, nf::kPacketCounterId);
  return pass_if(total == static_cast<std::int64_t>(kConservationPackets) && run.processed == kConservationPackets,
                 "combined pktCounter=" + std::to_string(total) + " processed=" + std::to_string(run.processed) +
                     " expected=" + std::to_string(kConservationPackets) + " cores=" + std::to_string(o.cores) +
                     " runtime=" + fmt(secs, 1) + "s (limit 60s)");
}

// 2
Outcome conformance() {
  FlatKvsDriver flat;
  TableStoreDriver table;
  auto server = MiniRespServer::start(0);
  RespDriver resp("127.0.0.1", server->port());
  std::uint64_t ops = 0, fetches = 0, divergences = 0;
  std::string first;
  for (int i = 0; i < kConformanceSequences; ++i) {
    auto a = flat.open_session();
    auto b = table.open_session();
    auto c = resp.open_session();
    auto r = fstest::run_conformance(1000 + i, kConformanceOps, "seq" + std::to_string(i),
                                     {{"flatkvs", a.get()}, {"tablestore", b.get()}, {"resp", c.get()}});
    ops += r.operations;
    fetches += r.fetches;
    divergences += r.divergences;
    if (first.empty()) first = r.first_divergence;
  }
  return pass_if(divergences == 0, std::to_string(kConformanceSequences) + " sequences x " +
                                       std::to_string(kConformanceOps) + " ops, " + std::to_string(fetches) +
                                       " compared fetches, divergences=" + std::to_string(divergences) +
                                       (first.empty() ? "" : " first: " + first));
}

// 3
bool lint_nflib(std::string& why) {
  static const std::set<std::string> allowed = {"api.hpp",    "cache.hpp", "error.hpp",   "key.hpp",  "mutation.hpp",
                                                "packet.hpp", "runtime.hpp", "store.hpp", "types.hpp"};
  const fs::path root = FLEXSTATE_SOURCE_DIR;
  std::size_t files = 0;
  for (const auto& dir : {root / "core/include/flexstate/nf", root / "core/src/nf"}) {
    for (const auto& e : fs::directory_iterator(dir)) {
      ++files;
      std::ifstream in(e.path());
      std::string line;
      while (std::getline(in, line)) {
        auto pos = line.find("#include \"flexstate/");
        if (pos == std::string::npos) pos = line.find("#include <flexstate/");
        if (pos == std::string::npos) continue;
        auto rest = line.substr(pos + 20);
        rest = rest.substr(0, rest.find_first_of("\">"));
        if (rest.rfind("nf/", 0) == 0 || allowed.count(rest)) continue;
        why = e.path().filename().string() + " includes flexstate/" + rest;
        return false;
      }
    }
  }
  if (files == 0) {
    why = "no nflib sources found";
    return false;
  }
  return true;
}

Outcome portability() {
  std::string why;
  if (!lint_nflib(why)) return {Outcome::Fail, "lint: " + why};

  auto server = MiniRespServer::start(0);
  const fs::path dir = fs::temp_directory_path() / ("flexstate_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> drivers = {
      {"flatkvs", "local"}, {"tablestore", "local"}, {"resp", server->endpoint()}};
  std::string detail;
  bool ok = true;
  for (const auto& [label, endpoint] : drivers) {
    const auto cfg = dir / (label + ".conf");
    std::ofstream(cfg) << "NF id: nf1;\nNF instance id: ins1;\ndriver: " << label << ";\nendpoint: " << endpoint
                       << ";\nflush interval us: 1000;\n";
    for (const auto* nf_name : {"counter-sync", "counter-async", "nat", "lb"}) {
      const auto out = dir / (label + "_" + nf_name + ".json");
      // same binary, same NF code; only --config differs
      const std::string cmd = std::string(FLEXBENCH_PATH) + " run --config " + cfg.string() + " --nf " + nf_name +
                              " --cores 2 --flows 2000 --budget 20000 --reps 1 --format json --report " +
                              out.string() + " > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      bool good = rc == 0;
      if (good) {
        std::ifstream in(out);
        auto j = nlohmann::json::parse(in, nullptr, false);
        good = !j.is_discarded() && j["status"] == "PASS" && j["scenario"]["driver"] == label;
      }
      if (!good) {
        ok = false;
        detail += " " + label + "/" + nf_name + " failed (rc " + std::to_string(rc) + ")";
      }
    }
  }
  fs::remove_all(dir);
  return pass_if(ok, "lint clean; flexbench ran 4 NFs x {flatkvs, tablestore, resp@" + server->endpoint() +
                         "} from config files alone" + detail);
}

// 4
Outcome async_vs_sync() {
  bench::BenchScenario base;
  base.cores = 1;
  base.repetitions = 1;
  base.injected_latency = kInjectedLatency;
  base.traffic.n_flows = kFlows;
  double worst = 1e300;
  std::vector<double> ratios;
  for (int i = 0; i < kSeeds; ++i) {
    auto sync = base;
    sync.nf.kind = nf::NfKind::CounterSync;
    sync.traffic.seed = 1 + i;
    sync.traffic.packet_budget = 2'000;
    auto async = sync;
    async.nf.kind = nf::NfKind::CounterAsync;
    async.traffic.packet_budget = 300'000;
    auto rs = bench::run_scenario(sync);
    auto ra = bench::run_scenario(async);
    if (!rs.passed() || !ra.passed()) return {Outcome::Fail, "correctness check failed" + failed_checks(rs) + failed_checks(ra)};
    const double ratio = ra.mean_pps / rs.mean_pps;
    ratios.push_back(ratio);
    worst = std::min(worst, ratio);
  }
  return pass_if(worst >= kAsyncSyncRatio, "latency=100us, " + std::to_string(kSeeds) + " seeds, min ratio " +
                                               fmt(worst, 1) + "x, median " + fmt(bench::median(ratios), 1) +
                                               "x (need >= " + fmt(kAsyncSyncRatio, 0) + "x every seed)");
}

// 5
Outcome store_independence() {
  const std::vector<std::string> drivers = {"flatkvs", "tablestore", "resp"};
  const std::vector<nf::NfKind> nfs = {nf::NfKind::CounterAsync, nf::NfKind::Nat, nf::NfKind::LoadBalancer};
  bool ok = true;
  std::string detail = "cores=" + std::to_string(best_cores()) + " seeds=" + std::to_string(kIndependenceSeeds);
  for (auto kind : nfs) {
    std::map<std::string, std::vector<double>> pps;
    // interleave drivers within each seed so host drift hits all of them alike
    for (int i = 0; i < kIndependenceSeeds; ++i) {
      for (std::size_t k = 0; k < drivers.size(); ++k) {
        const auto& d = drivers[(k + i) % drivers.size()];
        bench::BenchScenario s;
        s.nf.kind = kind;
        s.cores = best_cores();
        s.driver_label = d;
        s.repetitions = 1;
        s.traffic.seed = 1 + i;
        s.traffic.n_flows = kFlows;
        s.traffic.duration = kIndependenceRun;
        s.nf.nat_pool.size = kNatPool;
        auto r = bench::run_scenario(s);
        if (!r.passed()) return {Outcome::Fail, std::string(nf::nf_name(kind)) + "/" + d + failed_checks(r)};
        pps[d].push_back(r.mean_pps);
      }
    }
    double best = 0;
    for (auto& [d, v] : pps) best = std::max(best, bench::mean(v));
    detail += "; " + std::string(nf::nf_name(kind)) + ":";
    for (const auto& d : drivers) {
      const double m = bench::mean(pps[d]);
      const bool within = m >= (1.0 - kDriverSpread) * best;
      ok &= within;
      detail += " " + (d == "resp" ? std::string("resp@loopback") : d) + "=" + fmt(m / 1e6, 2) + "M(" +
                fmt(100.0 * m / best, 0) + "%)";
    }
  }
  return pass_if(ok, detail + " (each >= " + fmt(100 * (1 - kDriverSpread), 0) + "% of best)");
}

// 6
Outcome scaling() {
  const unsigned hw = std::thread::hardware_concurrency();
  std::map<std::uint32_t, double> med;
  const int seeds = hw >= kScalingMinThreads ? kSeeds : 3;
  for (std::uint32_t cores : {1u, 4u, 8u}) {
    std::vector<double> v;
    for (int i = 0; i < seeds; ++i) {
      bench::BenchScenario s;
      s.nf.kind = nf::NfKind::CounterAsync;
      s.cores = cores;
      s.repetitions = 1;
      s.verify = false;
      s.traffic.seed = 1 + i;
      s.traffic.duration = 1s;
      v.push_back(bench::run_scenario(s).mean_pps);
    }
    med[cores] = bench::median(v);
  }
  const double r4 = med[4] / med[1], r8 = med[8] / med[1];
  std::string detail = "median pps 1c=" + fmt(med[1] / 1e6, 2) + "M 4c=" + fmt(med[4] / 1e6, 2) + "M (" + fmt(r4, 2) +
                       "x) 8c=" + fmt(med[8] / 1e6, 2) + "M (" + fmt(r8, 2) + "x)";
  if (hw < kScalingMinThreads) {
    return {Outcome::Skip, "host has " + std::to_string(hw) + " hardware thread(s), criterion needs >= " +
                               std::to_string(kScalingMinThreads) + "; measured " + detail};
  }
  return pass_if(r4 >= kScale4 && r8 >= kScale8, detail + " (need 4c >= 2x, 8c >= 3x)");
}

// 7
Outcome nat_correctness() {
  bench::BenchScenario s;
  s.nf.kind = nf::NfKind::Nat;
  s.nf.nat_pool.size = kNatPool;
  s.cores = 8;
  s.repetitions = 1;
  s.traffic.n_flows = kFlows;
  s.traffic.packet_budget = 10 * kFlows;
  auto r = bench::run_scenario(s);
  std::set<std::string> names;
  for (const auto& c : r.repetitions.at(0).checks) names.insert(c.name);
  const bool all = names.count("nat.injective") && names.count("nat.stable") && names.count("nat.chunks_disjoint") &&
                   names.count("nat.pool_exhausted");
  return pass_if(r.passed() && all, "50000 flows, pool 65536, 8 cores, 500000 packets: injective, stable, chunks "
                                    "disjoint, PoolExhausted=" + std::to_string(r.repetitions[0].run.nf_drops) +
                                        failed_checks(r));
}

// 8
Outcome lb_balance() {
  bench::BenchScenario s;
  s.nf.kind = nf::NfKind::LoadBalancer;
  s.cores = 8;
  s.repetitions = 1;
  s.traffic.n_flows = kFlows;
  s.traffic.packet_budget = 10 * kFlows;
  auto r = bench::run_scenario(s);
  return pass_if(r.passed(), "8 cores, 4 servers, 50000 unit-weight flows: per-core spread <= 1, global spread <= 8, combined == sum of per-core" +
                                 failed_checks(r));
}

// 9
Outcome flush_cadence() {
  std::map<std::int64_t, std::uint64_t> batches;
  for (std::int64_t us : {2000, 1000, 500}) {
    bench::BenchScenario s;
    s.nf.kind = nf::NfKind::CounterAsync;
    s.cores = 1;
    s.repetitions = 1;
    s.verify = false;
    s.flush_interval = std::chrono::microseconds(us);
    s.traffic.n_flows = 1000;
    s.traffic.duration = kCadenceRun;
    auto r = bench::run_scenario(s);
    if (!r.passed()) return {Outcome::Fail, "run failed" + failed_checks(r)};
    batches[us] = r.repetitions[0].run.per_core[0].flush.flushes_succeeded;
  }
  const bool in_band = batches[1000] >= kCadenceLow && batches[1000] <= kCadenceHigh;
  const bool monotone = batches[1000] >= batches[2000] && batches[500] >= batches[1000];
  return pass_if(in_band && monotone, "10s dirty counter: batches@2ms=" + std::to_string(batches[2000]) +
                                          " @1ms=" + std::to_string(batches[1000]) + " (band [7500, 12500]) @0.5ms=" +
                                          std::to_string(batches[500]));
}

// 10
Outcome key_round_trip() {
  fstest::Gen g(2024);
  int failures = 0;
  for (int i = 0; i < kKeyRoundTrips; ++i) {
    auto k = g.key();
    try {
      if (!(parse_key(k.render()) == k)) ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }
  const std::vector<std::string> invalid = {
      "",      "a@b@1@Counter",        "a@b@1@Counter@x@y", "a@b@01@Counter@x", "a@b@-1@Counter@x",
      "a@b@+1@Counter@x", "a@b@x@Counter@x", "a@b@1@counter@x", "a@b@1@Bogus@x",   "@b@1@Counter@x",
      "a@@1@Counter@x", "a@b@1@Counter@",    "a@b@@Counter@x",  "a@b@4294967296@Counter@x",
      "a b@c@1@Counter@x", "a@b\t@1@Counter@x", "a@b@1@Counter@" + std::string(129, 'x'),
      std::string("a\x01@b@1@Counter@x"), "a@b@1@Counter@x\x7f"};
  int accepted = 0;
  for (const auto& s : invalid) {
    try {
      parse_key(s);
      ++accepted;
    } catch (const Error& e) {
      if (e.code() != Errc::InvalidToken) ++accepted;
    }
  }
  // builder side: every bad token is refused
  for (const auto* bad : {"", "a@b", "a b", "a\nb"}) {
    try {
      build_key(bad, "i", 0, StructureType::Counter, "x");
      ++accepted;
    } catch (const Error&) {
    }
  }
  return pass_if(failures == 0 && accepted == 0,
                 std::to_string(kKeyRoundTrips) + " random keys, round-trip failures=" + std::to_string(failures) +
                     ", invalid inputs accepted=" + std::to_string(accepted));
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "conservation", conservation},       {2, "driver conformance", conformance},
      {3, "config-only portability", portability}, {4, "async vs sync", async_vs_sync},
      {5, "store/location independence", store_independence}, {6, "scaling", scaling},
      {7, "NAT correctness", nat_correctness}, {8, "LB balance", lb_balance},
      {9, "flush cadence", flush_cadence},     {10, "key schema round-trip", key_round_trip},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.status == Outcome::Pass ? "PASS" : o.status == Outcome::Skip ? "SKIP" : "FAIL";
    std::printf("[%s] %d %s: %s [%.1fs]\n", tag, c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (o.status == Outcome::Fail) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
