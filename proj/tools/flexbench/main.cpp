// flexbench: run reference NFs over synthetic traffic against any driver.
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include <flexstate/config.hpp>
#include <flexstate/drivers/mini_server.hpp>
#include <flexstate/error.hpp>
#include <flexstate/trafficgen.hpp>

#include "bench.hpp"

using namespace flexstate;

namespace {

struct Flags {
  std::string config;
  std::string nf = "counter-async";
  std::uint32_t cores = 1;
  std::string driver;
  std::string endpoint;
  std::int64_t flush_interval_us = 0;
  std::uint32_t flows = 50'000;
  std::uint64_t seed = 1;
  double duration_s = 15;
  std::uint64_t budget = 0;
  std::int64_t latency_us = 0;
  std::uint32_t reps = 10;
  std::uint64_t pool = 65'536;
  std::vector<std::string> servers;
  std::string flow_file;
  std::string report;
  std::string format = "text";
};

void add_scenario_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "FlexState config file (driver, endpoint, interval, ids)");
  app.add_option("--nf", f.nf, "counter-sync | counter-async | nat | lb")
      ->check(CLI::IsMember({"counter-sync", "counter-async", "nat", "lb"}));
  app.add_option("--cores", f.cores, "worker cores")->check(CLI::PositiveNumber);
  app.add_option("--driver", f.driver, "driver label (overrides the config)");
  app.add_option("--endpoint", f.endpoint, "host:port or local");
  app.add_option("--flush-interval-us", f.flush_interval_us, "flush interval in microseconds");
  app.add_option("--flows", f.flows, "number of distinct flows")->check(CLI::PositiveNumber);
  app.add_option("--seed", f.seed, "first traffic seed");
  app.add_option("--duration-s", f.duration_s, "replay duration per repetition")->check(CLI::PositiveNumber);
  app.add_option("--budget", f.budget, "packets per repetition (replaces --duration-s)");
  app.add_option("--inject-latency-us", f.latency_us, "added delay per store round trip")->check(CLI::NonNegativeNumber);
  app.add_option("--reps", f.reps, "repetitions (seeds seed..seed+reps-1)")->check(CLI::PositiveNumber);
  app.add_option("--nat-pool", f.pool, "NAT pool size in (ip, port) pairs")->check(CLI::PositiveNumber);
  app.add_option("--servers", f.servers, "load balancer server ids")->delimiter(',');
  app.add_option("--flow-file", f.flow_file, "replay flows from this file");
  app.add_option("--report", f.report, "write the report here instead of stdout");
  app.add_option("--format", f.format, "json | csv | text")->check(CLI::IsMember({"json", "csv", "text"}));
}

bench::BenchScenario scenario_from(const Flags& f) {
  bench::BenchScenario s;
  if (!f.config.empty()) {
    auto cfg = load_config(f.config);
    s.driver_label = cfg.driver_label;
    s.endpoint = cfg.endpoint;
    s.flush_interval = cfg.flush_interval;
    s.nf_id = cfg.nf_id;
    s.instance_id = cfg.instance_id;
  }
  if (!f.driver.empty()) s.driver_label = f.driver;
  if (!f.endpoint.empty()) s.endpoint = f.endpoint;
  if (f.flush_interval_us != 0) s.flush_interval = std::chrono::microseconds(f.flush_interval_us);
  s.nf.kind = nf::parse_nf(f.nf);
  s.nf.nat_pool.size = f.pool;
  s.nf.servers = f.servers;
  s.cores = f.cores;
  s.traffic.n_flows = f.flows;
  s.traffic.seed = f.seed;
  if (f.budget > 0) {
    s.traffic.packet_budget = f.budget;
  } else {
    s.traffic.duration = std::chrono::duration<double>(f.duration_s);
  }
  if (!f.flow_file.empty()) s.flows = FlowFile::load(f.flow_file);
  s.injected_latency = std::chrono::microseconds(f.latency_us);
  s.repetitions = f.reps;
  return s;
}

void emit(const Flags& f, const std::string& text) {
  if (f.report.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(f.report);
  if (!out) throw Error(Errc::InvalidArgument, "cannot write " + f.report);
  out << text << '\n';
}

std::string csv_of(const bench::BenchReport& r) {
  bench::SweepTable t;
  t.axis = bench::SweepAxis::Nf;
  t.cells.push_back({std::string(nf::nf_name(r.scenario.nf.kind)), r, {}, true});
  return t.to_csv();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flexbench: NF state-management benchmarks"};
  app.require_subcommand(1);

  Flags run_flags;
  auto* run = app.add_subcommand("run", "run one scenario");
  add_scenario_flags(*run, run_flags);

  Flags sweep_flags;
  std::string axis;
  std::vector<std::string> values;
  auto* sw = app.add_subcommand("sweep", "run a scenario grid along one axis");
  add_scenario_flags(*sw, sweep_flags);
  sw->add_option("--axis", axis, "cores | driver | interval | nf")->required();
  sw->add_option("--values", values, "comma separated axis values")->required()->delimiter(',');

  std::uint32_t gen_flows = 50'000;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-flows", "write a flow file");
  gen->add_option("--flows", gen_flows)->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out)->required();

  std::uint16_t serve_port = 6379;
  std::string serve_host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "run the mini RESP server until interrupted");
  serve->add_option("--port", serve_port);
  serve->add_option("--host", serve_host);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto report = bench::run_scenario(scenario_from(run_flags));
      const auto& fmt = run_flags.format;
      emit(run_flags, fmt == "json" ? report.to_json() : fmt == "csv" ? csv_of(report) : report.to_text());
      return report.passed() ? 0 : 1;
    }
    if (sw->parsed()) {
      auto table = bench::sweep(bench::parse_axis(axis), values, scenario_from(sweep_flags));
      const auto& fmt = sweep_flags.format;
      emit(sweep_flags, fmt == "json" ? table.to_json() : fmt == "csv" ? table.to_csv() : table.to_text());
      return table.passed() ? 0 : 1;
    }
    if (gen->parsed()) {
      TrafficSpec spec;
      spec.n_flows = gen_flows;
      spec.seed = gen_seed;
      generate_flows(spec).save(gen_out);
      return 0;
    }
    if (serve->parsed()) {
      // block before the server threads start so they inherit the mask
      sigset_t set;
      sigemptyset(&set);
      sigaddset(&set, SIGINT);
      sigaddset(&set, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &set, nullptr);
      auto server = MiniRespServer::start(serve_port, serve_host);
      std::cerr << "serving on " << server->endpoint() << "\n";
      int sig = 0;
      sigwait(&set, &sig);
      server->stop();
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "flexbench: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "flexbench: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
