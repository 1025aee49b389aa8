#include "bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include <flexstate/drivers/drivers.hpp>
#include <flexstate/drivers/mini_server.hpp>
#include <flexstate/error.hpp>
#include <flexstate/nf/combine.hpp>
#include <flexstate/nf/counter.hpp>
#include <flexstate/nf/lb.hpp>
#include <flexstate/nf/nat.hpp>

namespace flexstate::bench {

using nf::NfKind;

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stdev(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  const double m = mean(v);
  double acc = 0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

// Scenario

bool BenchScenario::embedded_server() const {
  return driver_label == "resp" && (endpoint == "local" || endpoint == "loopback");
}

void BenchScenario::validate(const DriverRegistry& registry) const {
  if (cores == 0) throw Error(Errc::InvalidArgument, "cores must be positive");
  if (repetitions == 0) throw Error(Errc::InvalidArgument, "repetitions must be positive");
  if (flush_interval.count() <= 0) throw Error(Errc::BadDuration, "flush interval must be positive");
  if (injected_latency.count() < 0) throw Error(Errc::BadDuration, "injected latency must be >= 0");
  if (!registry.contains(driver_label)) throw Error(Errc::UnknownDriver, "unknown driver '" + driver_label + "'");
  if (!is_valid_token(nf_id) || !is_valid_token(instance_id)) {
    throw Error(Errc::InvalidToken, "bad NF or instance id");
  }
  traffic.validate();
  if (!traffic.packet_budget && !traffic.duration) {
    throw Error(Errc::InvalidArgument, "traffic needs a packet budget or a duration");
  }
  if (nf.kind == NfKind::Nat) nf.nat_pool.validate();
  if (flows && flows->empty()) throw Error(Errc::ParseError, "flow file has no flows");
}

std::string BenchScenario::describe() const {
  std::ostringstream out;
  out << nf::nf_name(nf.kind) << " cores=" << cores << " driver=" << driver_label;
  if (endpoint != "local") out << "@" << endpoint;
  out << " interval=" << flush_interval.count() << "us";
  if (injected_latency.count() > 0) out << " latency=" << injected_latency.count() << "us";
  return out.str();
}

bool Repetition::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

bool BenchReport::passed() const {
  return !repetitions.empty() &&
         std::all_of(repetitions.begin(), repetitions.end(), [](const Repetition& r) { return r.passed(); });
}

namespace {

nlohmann::json scenario_json(const BenchScenario& s) {
  nlohmann::json j{{"nf", nf::nf_name(s.nf.kind)},
                   {"cores", s.cores},
                   {"driver", s.driver_label},
                   {"endpoint", s.endpoint},
                   {"flush_interval_us", s.flush_interval.count()},
                   {"flows", s.flows ? s.flows->size() : s.traffic.n_flows},
                   {"packet_size", s.traffic.packet_size},
                   {"seed", s.traffic.seed},
                   {"injected_latency_us", s.injected_latency.count()},
                   {"repetitions", s.repetitions}};
  if (s.traffic.packet_budget) {
    j["packet_budget"] = *s.traffic.packet_budget;
  } else if (s.traffic.duration) {
    j["duration_s"] = s.traffic.duration->count();
  }
  return j;
}

}  // namespace

std::string BenchReport::to_json() const {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : repetitions) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    reps.push_back({{"seed", r.seed}, {"run", nlohmann::json::parse(r.run.to_json())}, {"checks", checks},
                    {"passed", r.passed()}});
  }
  nlohmann::json j{{"scenario", scenario_json(scenario)},
                   {"repetitions", reps},
                   {"mean_pps", mean_pps},
                   {"stdev_pps", stdev_pps},
                   {"median_pps", median_pps},
                   {"status", passed() ? "PASS" : "FAILED"}};
  return j.dump(2);
}

std::string BenchReport::to_text() const {
  std::ostringstream out;
  out << scenario.describe() << "\n";
  out << std::left << std::setw(8) << "seed" << std::right << std::setw(12) << "processed" << std::setw(10)
      << "dropped" << std::setw(10) << "nf_drops" << std::setw(14) << "pps" << std::setw(10) << "flushes"
      << "  checks\n";
  for (const auto& r : repetitions) {
    std::uint64_t flushes = 0;
    for (const auto& c : r.run.per_core) flushes += c.flush.flushes_succeeded;
    out << std::left << std::setw(8) << r.seed << std::right << std::setw(12) << r.run.processed << std::setw(10)
        << r.run.dropped << std::setw(10) << r.run.nf_drops << std::setw(14) << std::fixed << std::setprecision(0)
        << r.run.pps << std::setw(10) << flushes << "  " << (r.passed() ? "PASS" : "FAIL") << "\n";
    for (const auto& c : r.checks) {
      if (!c.passed) out << "        " << c.name << ": " << c.detail << "\n";
    }
  }
  out << std::fixed << std::setprecision(0) << "mean " << mean_pps << " pps, stdev " << stdev_pps << ", median "
      << median_pps << "  " << (passed() ? "PASS" : "FAILED") << "\n";
  return out.str();
}

// Running

namespace {

struct Egress {
  // flow as received -> what the NF emitted for it the first time
  std::unordered_map<FlowKey, std::uint64_t, FlowKeyHash> first;
  std::uint64_t unstable = 0;
};

std::uint64_t emitted_token(NfKind kind, const Packet& p) {
  if (kind == NfKind::LoadBalancer) return p.tag;
  return std::uint64_t{p.flow.src_ip} << 16 | p.flow.src_port;
}

void check(std::vector<CheckResult>& out, std::string name, bool ok, std::string detail = {}) {
  out.push_back({std::move(name), ok, ok ? std::string() : std::move(detail)});
}

const std::string& run_nonce() {
  static const std::string nonce = [] {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
    std::ostringstream out;
    out << 't' << std::hex << ms << 'p' << ::getpid();
    return out.str();
  }();
  return nonce;
}

void counter_checks(const BenchScenario& s, const RunReport& run, StoreSession& session,
                    const std::string& instance, std::vector<CheckResult>& out) {
  const auto total = nf::combine_counters(session, s.nf_id, {instance}, nf::kPacketCounterId);
  // async drops (backpressure) never reached the counter; sync drops did
  const auto expected = static_cast<std::int64_t>(
      run.processed - (s.nf.kind == NfKind::CounterAsync ? run.nf_drops : 0));
  check(out, "conservation", total == expected,
        "combined pktCounter " + std::to_string(total) + " != " + std::to_string(expected));
}

void nat_checks(const BenchScenario& s, const RunReport& run, StoreSession& session, const std::string& instance,
                const std::vector<Egress>& egress, std::vector<CheckResult>& out) {
  const auto& pool = s.nf.nat_pool;
  check(out, "nat.pool_exhausted", run.nf_drops == 0, std::to_string(run.nf_drops) + " packets hit PoolExhausted");

  // chunks: contiguous, disjoint, covering the pool
  std::uint64_t next = 0;
  bool tiled = true;
  for (std::uint32_t c = 0; c < s.cores; ++c) {
    auto ch = nf::chunk_for(pool, c, s.cores);
    tiled &= ch.begin == next && ch.end >= ch.begin;
    next = ch.end;
  }
  check(out, "nat.chunks_disjoint", tiled && next == pool.size, "chunks do not tile the pool");

  std::set<nf::ExternalPair> used;
  std::uint64_t duplicates = 0, outside = 0, misplaced = 0, mismatched = 0, missing = 0;
  std::vector<std::uint64_t> per_core_bindings(s.cores, 0);
  for (const auto& [core, snap] : nf::per_core(session, s.nf_id, instance, StructureType::Map, nf::kNatBindingsId)) {
    const auto* m = std::get_if<MapValue>(&snap);
    if (!m || core >= s.cores) continue;
    const auto chunk = nf::chunk_for(pool, core, s.cores);
    per_core_bindings[core] = m->size();
    for (const auto& [flow_bytes, pair_bytes] : *m) {
      const auto flow = FlowKey::decode(flow_bytes);
      const auto pair = nf::ExternalPair::decode(pair_bytes);
      if (!used.insert(pair).second) ++duplicates;
      auto idx = pool.index_of(pair);
      if (!idx || !chunk.contains(*idx)) ++outside;
      if (rss_hash(flow, s.cores) != core) ++misplaced;
      if (s.verify) {
        auto it = egress[core].first.find(flow);
        if (it == egress[core].first.end()) {
          ++missing;
        } else if (it->second != (std::uint64_t{pair.ip} << 16 | pair.port)) {
          ++mismatched;
        }
      }
    }
    auto cursor = session.fetch(build_key(s.nf_id, instance, core, StructureType::Counter, nf::kNatCursorId));
    const auto* cur = std::get_if<std::int64_t>(&cursor);
    if (!cur || static_cast<std::uint64_t>(*cur) != m->size()) ++mismatched;
  }
  check(out, "nat.injective", duplicates == 0, std::to_string(duplicates) + " pairs bound twice");
  check(out, "nat.in_chunk", outside == 0 && misplaced == 0,
        std::to_string(outside) + " pairs outside their core's chunk, " + std::to_string(misplaced) +
            " bindings on the wrong core");
  if (s.verify) {
    std::uint64_t unstable = 0, forwarded = 0, bound = 0;
    for (std::uint32_t c = 0; c < s.cores; ++c) {
      unstable += egress[c].unstable;
      forwarded += egress[c].first.size();
      bound += per_core_bindings[c];
    }
    check(out, "nat.stable", unstable == 0 && mismatched == 0 && missing == 0,
          std::to_string(unstable) + " flows changed pair, " + std::to_string(mismatched) +
              " stored bindings differ from egress, " + std::to_string(missing) + " bindings never seen");
    check(out, "nat.complete", forwarded == bound,
          std::to_string(forwarded) + " translated flows vs " + std::to_string(bound) + " stored bindings");
  }
}

void lb_checks(const BenchScenario& s, StoreSession& session, const std::string& instance,
               const std::vector<Egress>& egress, std::vector<CheckResult>& out) {
  const auto servers = s.nf.servers.empty() ? nf::default_servers() : s.nf.servers;
  auto load_of = [&](const CounterMapValue& m, const std::string& server) {
    auto it = m.find(server);
    return it == m.end() ? std::int64_t{0} : it->second;
  };

  CounterMapValue summed;
  std::int64_t worst_core_spread = 0;
  std::uint64_t log_mismatch = 0;
  std::map<std::uint32_t, CounterMapValue> stored;
  for (auto& [core, snap] : nf::per_core(session, s.nf_id, instance, StructureType::CounterMap, nf::kLbLoadId)) {
    if (auto* m = std::get_if<CounterMapValue>(&snap)) stored[core] = *m;
  }
  for (std::uint32_t c = 0; c < s.cores; ++c) {
    const auto& m = stored[c];
    std::int64_t lo = INT64_MAX, hi = INT64_MIN;
    for (const auto& srv : servers) {
      const auto l = load_of(m, srv);
      lo = std::min(lo, l);
      hi = std::max(hi, l);
      summed[srv] += l;
    }
    worst_core_spread = std::max(worst_core_spread, hi - lo);
    if (s.verify) {
      // the per-core log: distinct flows this core sent to each server
      std::vector<std::int64_t> logged(servers.size(), 0);
      for (const auto& [flow, tag] : egress[c].first) {
        if (tag < logged.size()) ++logged[tag];
      }
      for (std::size_t i = 0; i < servers.size(); ++i) log_mismatch += logged[i] != load_of(m, servers[i]);
    }
  }
  check(out, "lb.core_balance", worst_core_spread <= 1,
        "per-core max-min load " + std::to_string(worst_core_spread) + " > 1");

  const auto combined = nf::combine_countermaps(session, s.nf_id, {instance}, nf::kLbLoadId);
  std::int64_t lo = INT64_MAX, hi = INT64_MIN;
  bool sums_match = true;
  for (const auto& srv : servers) {
    const auto l = load_of(combined, srv);
    lo = std::min(lo, l);
    hi = std::max(hi, l);
    sums_match &= l == summed[srv];
  }
  check(out, "lb.global_balance", hi - lo <= static_cast<std::int64_t>(s.cores),
        "global max-min load " + std::to_string(hi - lo) + " > " + std::to_string(s.cores));
  check(out, "lb.combined_totals", sums_match, "combine_countermaps differs from the per-core sum");
  if (s.verify) {
    std::uint64_t unstable = 0;
    for (const auto& e : egress) unstable += e.unstable;
    check(out, "lb.stable", unstable == 0 && log_mismatch == 0,
          std::to_string(unstable) + " flows changed server, " + std::to_string(log_mismatch) +
              " per-core loads differ from the egress log");
  }
}

Repetition run_once(const BenchScenario& s, std::uint64_t seed, const DriverRegistry& registry) {
  Repetition rep;
  rep.seed = seed;

  TrafficSpec traffic = s.traffic;
  traffic.seed = seed;
  const FlowFile flows = s.flows ? *s.flows : generate_flows(traffic);

  std::unique_ptr<MiniRespServer> server;
  std::unique_ptr<StoreDriver> store;
  std::string instance = s.instance_id;
  if (s.embedded_server()) {
    server = MiniRespServer::start(0);
    store = std::make_unique<RespDriver>("127.0.0.1", server->port());
  } else {
    store = registry.create(s.driver_label, s.endpoint);
    // a shared external store keeps state from earlier runs and repetitions
    if (s.endpoint != "local") instance += "." + run_nonce() + ".r" + std::to_string(seed);
  }
  std::unique_ptr<StoreDriver> slow;
  StoreDriver* driver = store.get();
  if (s.injected_latency.count() > 0) {
    slow = std::make_unique<LatencyDriver>(*store, s.injected_latency);
    driver = slow.get();
  }

  PoolOptions options;
  options.cores = s.cores;
  options.queue_capacity = s.queue_capacity;
  options.overflow = s.overflow;
  options.nf_id = s.nf_id;
  options.instance_id = instance;
  options.cache.flush_interval = s.flush_interval;
  options.record_flows = s.verify;

  std::vector<Egress> egress(s.cores);
  EgressHook hook;
  const bool stateful = s.nf.kind == NfKind::Nat || s.nf.kind == NfKind::LoadBalancer;
  if (s.verify && stateful) {
    hook = [&egress, kind = s.nf.kind](std::uint32_t core, const FlowKey& in, const Packet& outp, Verdict v) {
      if (v != Verdict::Forward) return;
      auto& e = egress[core];
      const auto token = emitted_token(kind, outp);
      auto [it, inserted] = e.first.emplace(in, token);
      if (!inserted && it->second != token) ++e.unstable;
    };
  }

  WorkerPool pool(*driver, options);
  ReplaySource source(flows, traffic);
  rep.run = pool.run(nf::make_handler_factory(s.nf, s.cores), source, hook);

  auto& checks = rep.checks;
  std::string errors;
  for (const auto& c : rep.run.per_core) {
    if (!c.error.empty()) errors += "core " + std::to_string(c.core) + ": " + c.error + "; ";
  }
  check(checks, "workers", errors.empty(), errors);
  check(checks, "accounting", rep.run.packets_in == rep.run.processed + rep.run.dropped,
        "in " + std::to_string(rep.run.packets_in) + " != processed + dropped");
  if (s.verify && rep.run.dropped == 0 && rep.run.packets_in >= flows.size()) {
    std::uint64_t distinct = 0;
    for (const auto& c : rep.run.per_core) distinct += c.distinct_flows;
    check(checks, "flow_count", distinct == flows.size(),
          std::to_string(distinct) + " distinct flows seen, expected " + std::to_string(flows.size()));
  }

  auto session = store->open_session();
  switch (s.nf.kind) {
    case NfKind::CounterSync:
    case NfKind::CounterAsync: counter_checks(s, rep.run, *session, instance, checks); break;
    case NfKind::Nat: nat_checks(s, rep.run, *session, instance, egress, checks); break;
    case NfKind::LoadBalancer: lb_checks(s, *session, instance, egress, checks); break;
  }
  return rep;
}

}  // namespace

BenchReport run_scenario(const BenchScenario& scenario, const DriverRegistry& registry) {
  scenario.validate(registry);
  BenchReport report;
  report.scenario = scenario;
  std::vector<double> pps;
  for (std::uint32_t r = 0; r < scenario.repetitions; ++r) {
    report.repetitions.push_back(run_once(scenario, scenario.traffic.seed + r, registry));
    pps.push_back(report.repetitions.back().run.pps);
  }
  report.mean_pps = mean(pps);
  report.stdev_pps = stdev(pps);
  report.median_pps = median(pps);
  return report;
}

// Sweeps

SweepAxis parse_axis(std::string_view name) {
  for (auto a : {SweepAxis::Cores, SweepAxis::Driver, SweepAxis::Interval, SweepAxis::Nf}) {
    if (axis_name(a) == name) return a;
  }
  throw Error(Errc::InvalidArgument, "unknown sweep axis '" + std::string(name) + "'");
}

std::string_view axis_name(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::Cores: return "cores";
    case SweepAxis::Driver: return "driver";
    case SweepAxis::Interval: return "interval";
    case SweepAxis::Nf: return "nf";
  }
  return "?";
}

namespace {

std::int64_t parse_positive(const std::string& v, std::string_view what) {
  std::int64_t n = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc{} || ptr != v.data() + v.size() || n <= 0) {
    throw Error(Errc::InvalidArgument, "bad " + std::string(what) + " '" + v + "'");
  }
  return n;
}

}  // namespace

BenchScenario apply_axis(BenchScenario s, SweepAxis axis, const std::string& value) {
  switch (axis) {
    case SweepAxis::Cores: s.cores = static_cast<std::uint32_t>(parse_positive(value, "core count")); break;
    case SweepAxis::Interval: s.flush_interval = std::chrono::microseconds(parse_positive(value, "interval")); break;
    case SweepAxis::Nf: s.nf.kind = nf::parse_nf(value); break;
    case SweepAxis::Driver: {
      auto at = value.find('@');
      s.driver_label = value.substr(0, at);
      s.endpoint = at == std::string::npos ? "local" : value.substr(at + 1);
      break;
    }
  }
  return s;
}

SweepTable sweep(SweepAxis axis, const std::vector<std::string>& values, const BenchScenario& base,
                 const DriverRegistry& registry) {
  if (values.empty()) throw Error(Errc::InvalidArgument, "sweep needs at least one value");
  SweepTable table;
  table.axis = axis;
  for (const auto& v : values) {
    SweepCell cell;
    cell.value = v;
    try {
      cell.report = run_scenario(apply_axis(base, axis, v), registry);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    table.cells.push_back(std::move(cell));
  }
  SweepCell* best = nullptr;
  for (auto& c : table.cells) {
    if (c.report && (!best || c.report->mean_pps > best->report->mean_pps)) best = &c;
  }
  if (best) best->best = true;
  return table;
}

bool SweepTable::passed() const {
  return std::all_of(cells.begin(), cells.end(),
                     [](const SweepCell& c) { return c.report && c.report->passed(); });
}

std::string SweepTable::to_csv() const {
  std::ostringstream out;
  out << "axis,value,nf,cores,driver,interval_us,mean_pps,stdev_pps,median_pps,flushes,status,best\n";
  for (const auto& c : cells) {
    out << axis_name(axis) << "," << c.value << ",";
    if (!c.report) {
      out << ",,,,,,,,ERROR,0\n";
      continue;
    }
    const auto& r = *c.report;
    std::uint64_t flushes = 0;
    for (const auto& rep : r.repetitions) {
      for (const auto& core : rep.run.per_core) flushes += core.flush.flushes_succeeded;
    }
    out << nf::nf_name(r.scenario.nf.kind) << "," << r.scenario.cores << "," << r.scenario.driver_label << ","
        << r.scenario.flush_interval.count() << "," << std::fixed << std::setprecision(1) << r.mean_pps << ","
        << r.stdev_pps << "," << r.median_pps << "," << flushes << "," << (r.passed() ? "PASS" : "FAILED") << ","
        << (c.best ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string SweepTable::to_json() const {
  nlohmann::json cells_json = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json j{{"value", c.value}, {"best", c.best}};
    if (c.report) {
      j["report"] = nlohmann::json::parse(c.report->to_json());
    } else {
      j["error"] = c.error;
    }
    cells_json.push_back(std::move(j));
  }
  return nlohmann::json{{"axis", axis_name(axis)}, {"cells", cells_json}, {"status", passed() ? "PASS" : "FAILED"}}
      .dump(2);
}

std::string SweepTable::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(16) << axis_name(axis) << std::right << std::setw(14) << "mean pps" << std::setw(12)
      << "stdev" << "  status\n";
  for (const auto& c : cells) {
    out << std::left << std::setw(16) << c.value << std::right;
    if (!c.report) {
      out << "  error: " << c.error << "\n";
      continue;
    }
    out << std::setw(14) << std::fixed << std::setprecision(0) << c.report->mean_pps << std::setw(12)
        << c.report->stdev_pps << "  " << (c.report->passed() ? "PASS" : "FAILED") << (c.best ? "  *best" : "")
        << "\n";
  }
  return out.str();
}

}  // namespace flexstate::bench
