#include "flexstate/runtime.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <mutex>
#include <stdexcept>

#include <boost/lockfree/spsc_queue.hpp>
#include <nlohmann/json.hpp>

namespace flexstate {

// Packet / FlowKey

std::array<std::uint8_t, 13> FlowKey::bytes() const noexcept {
  return {static_cast<std::uint8_t>(src_ip >> 24), static_cast<std::uint8_t>(src_ip >> 16),
          static_cast<std::uint8_t>(src_ip >> 8),  static_cast<std::uint8_t>(src_ip),
          static_cast<std::uint8_t>(dst_ip >> 24), static_cast<std::uint8_t>(dst_ip >> 16),
          static_cast<std::uint8_t>(dst_ip >> 8),  static_cast<std::uint8_t>(dst_ip),
          static_cast<std::uint8_t>(src_port >> 8), static_cast<std::uint8_t>(src_port),
          static_cast<std::uint8_t>(dst_port >> 8), static_cast<std::uint8_t>(dst_port),
          proto};
}

std::string FlowKey::encode() const {
  auto b = bytes();
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

FlowKey FlowKey::decode(std::string_view s) {
  if (s.size() != 13) throw Error(Errc::ParseError, "flow key encoding must be 13 bytes");
  auto u = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])); };
  FlowKey k;
  k.src_ip = u(0) << 24 | u(1) << 16 | u(2) << 8 | u(3);
  k.dst_ip = u(4) << 24 | u(5) << 16 | u(6) << 8 | u(7);
  k.src_port = static_cast<std::uint16_t>(u(8) << 8 | u(9));
  k.dst_port = static_cast<std::uint16_t>(u(10) << 8 | u(11));
  k.proto = static_cast<std::uint8_t>(u(12));
  return k;
}

void Packet::reflect() noexcept {
  std::swap(flow.src_ip, flow.dst_ip);
  std::swap(flow.src_port, flow.dst_port);
}

std::string format_ipv4(std::uint32_t addr) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", addr >> 24, (addr >> 16) & 0xff, (addr >> 8) & 0xff,
                addr & 0xff);
  return buf;
}

std::uint32_t parse_ipv4(std::string_view text) {
  std::uint32_t out = 0;
  int parts = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  while (parts < 4) {
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || v > 255 || ptr == p || ptr - p > 3) {
      throw Error(Errc::ParseError, "bad IPv4 address '" + std::string(text) + "'");
    }
    out = out << 8 | v;
    ++parts;
    p = ptr;
    if (parts < 4) {
      if (p == end || *p != '.') throw Error(Errc::ParseError, "bad IPv4 address '" + std::string(text) + "'");
      ++p;
    }
  }
  if (p != end) throw Error(Errc::ParseError, "bad IPv4 address '" + std::string(text) + "'");
  return out;
}

// rss

std::uint64_t flow_hash(const FlowKey& flow) noexcept {
  // FNV-1a over the canonical bytes, then the murmur3 finaliser for avalanche.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : flow.bytes()) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

std::size_t FlowKeyHash::operator()(const FlowKey& k) const noexcept {
  return static_cast<std::size_t>(flow_hash(k));
}

std::uint32_t rss_hash(const FlowKey& flow, std::uint32_t n_cores) noexcept {
  if (n_cores <= 1) return 0;
  return static_cast<std::uint32_t>(flow_hash(flow) % n_cores);
}

// RunReport

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["cores"] = cores;
  j["packets_in"] = packets_in;
  j["processed"] = processed;
  j["dropped"] = dropped;
  j["nf_drops"] = nf_drops;
  j["duration_ns"] = duration.count();
  j["pps"] = pps;
  nlohmann::json per = nlohmann::json::array();
  for (const auto& c : per_core) {
    per.push_back({{"core", c.core},
                   {"processed", c.processed},
                   {"dropped", c.dropped},
                   {"nf_drops", c.nf_drops},
                   {"distinct_flows", c.distinct_flows},
                   {"flush", nlohmann::json::parse(c.flush.to_json())},
                   {"error", c.error}});
  }
  j["per_core"] = per;
  return j.dump();
}

// WorkerPool

struct WorkerPool::Worker {
  Worker(std::uint32_t id, std::size_t capacity) : core(id), queue(capacity) {}

  std::uint32_t core;
  boost::lockfree::spsc_queue<Packet> queue;
  std::unique_ptr<CoreCache> cache;
  std::thread thread;

  // written by the worker, read by the control thread after join
  std::uint64_t processed = 0;
  std::uint64_t nf_drops = 0;
  std::chrono::steady_clock::time_point finished;
  std::string error;

  // written by the dispatcher
  std::uint64_t dropped = 0;

  std::atomic<int> ready{0};  // 1 ok, -1 failed
  std::exception_ptr init_error;
};

WorkerPool::WorkerPool(StoreDriver& driver, PoolOptions options)
    : driver_(driver), options_(std::move(options)) {
  if (options_.cores == 0) throw Error(Errc::InvalidArgument, "worker pool needs at least one core");
  if (options_.queue_capacity == 0) throw Error(Errc::InvalidArgument, "queue capacity must be positive");
}

WorkerPool::~WorkerPool() {
  if (running_) {
    stopping_.store(true);
    for (auto& w : workers_) {
      if (w->thread.joinable()) w->thread.join();
    }
  }
}

void WorkerPool::worker_main(Worker& w, const HandlerFactory& factory) {
  w.cache->bind_owner();
  StateContext ctx(*w.cache);
  std::unique_ptr<PacketHandler> handler;
  try {
    handler = factory(ctx);
  } catch (...) {
    w.init_error = std::current_exception();
    w.ready.store(-1);
    w.ready.notify_all();
    return;
  }
  w.ready.store(1);
  w.ready.notify_all();

  std::unordered_set<FlowKey, FlowKeyHash>* flows = options_.record_flows ? &flows_[w.core] : nullptr;
  std::array<Packet, 64> burst;
  unsigned idle = 0;
  while (true) {
    const auto n = w.queue.pop(burst.data(), burst.size());
    if (n == 0) {
      if (stopping_.load(std::memory_order_acquire) && w.queue.read_available() == 0) break;
      w.cache->tick();
      if (++idle < 64) {
        std::this_thread::yield();
      } else {
        std::this_thread::sleep_for(std::chrono::microseconds(50));
      }
      continue;
    }
    idle = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Packet& p = burst[i];
      const FlowKey received = p.flow;
      Verdict verdict = Verdict::Drop;
      try {
        verdict = handler->handle(p);
      } catch (const Error& e) {
        if (w.error.empty()) w.error = e.what();
      }
      ++w.processed;
      if (verdict == Verdict::Drop) ++w.nf_drops;
      if (flows) flows->insert(received);
      if (hook_) hook_(w.core, received, p, verdict);
    }
    w.cache->tick();
  }
  w.finished = std::chrono::steady_clock::now();

  try {
    handler->finish();
    handler.reset();
    w.cache->flush_now_and_drain();
  } catch (const std::exception& e) {
    if (w.error.empty()) w.error = e.what();
  }
}

void WorkerPool::start(HandlerFactory factory, EgressHook hook) {
  if (running_) throw Error(Errc::InvalidArgument, "worker pool already running");
  hook_ = std::move(hook);
  stopping_.store(false);
  packets_in_ = 0;
  workers_.clear();
  flows_.assign(options_.cores, {});

  for (std::uint32_t core = 0; core < options_.cores; ++core) {
    auto w = std::make_unique<Worker>(core, options_.queue_capacity);
    w->cache = std::make_unique<CoreCache>(options_.nf_id, options_.instance_id, core, driver_,
                                           options_.cache);
    workers_.push_back(std::move(w));
  }
  auto shared_factory = std::make_shared<HandlerFactory>(std::move(factory));
  for (auto& w : workers_) {
    w->thread = std::thread([this, worker = w.get(), shared_factory] {
      worker_main(*worker, *shared_factory);
    });
  }
  running_ = true;

  std::exception_ptr failure;
  for (auto& w : workers_) {
    w->ready.wait(0);
    if (w->ready.load() < 0 && !failure) failure = w->init_error;
  }
  if (failure) {
    stopping_.store(true);
    for (auto& w : workers_) w->thread.join();
    running_ = false;
    workers_.clear();
    std::rethrow_exception(failure);
  }
  started_ = std::chrono::steady_clock::now();
}

bool WorkerPool::dispatch(const Packet& packet) {
  auto& w = *workers_[rss_hash(packet.flow, options_.cores)];
  ++packets_in_;
  if (w.queue.push(packet)) return true;
  if (options_.overflow == OverflowPolicy::Drop) {
    ++w.dropped;
    return false;
  }
  while (!w.queue.push(packet)) std::this_thread::yield();
  return true;
}

RunReport WorkerPool::stop() {
  if (!running_) throw Error(Errc::InvalidArgument, "worker pool not running");
  stopping_.store(true, std::memory_order_release);
  for (auto& w : workers_) w->thread.join();
  running_ = false;

  RunReport report;
  report.cores = options_.cores;
  report.packets_in = packets_in_;
  auto last = started_;
  for (auto& w : workers_) {
    CoreReport c;
    c.core = w->core;
    c.processed = w->processed;
    c.dropped = w->dropped;
    c.nf_drops = w->nf_drops;
    c.distinct_flows = options_.record_flows ? flows_[w->core].size() : 0;
    c.flush = w->cache->stats();
    c.error = w->error;
    report.processed += c.processed;
    report.dropped += c.dropped;
    report.nf_drops += c.nf_drops;
    last = std::max(last, w->finished);
    report.per_core.push_back(std::move(c));
  }
  report.duration = std::chrono::duration_cast<std::chrono::nanoseconds>(last - started_);
  const double seconds = std::chrono::duration<double>(report.duration).count();
  report.pps = seconds > 0 ? static_cast<double>(report.processed) / seconds : 0.0;

  // caches (and their flushers) go away with the workers
  workers_.clear();
  return report;
}

RunReport WorkerPool::run(HandlerFactory factory, PacketSource& source, EgressHook hook) {
  start(std::move(factory), std::move(hook));
  Packet p;
  while (source.next(p)) dispatch(p);
  return stop();
}

}  // namespace flexstate
