#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <flexstate/nf/catalog.hpp>
#include <flexstate/runtime.hpp>
#include <flexstate/store.hpp>
#include <flexstate/trafficgen.hpp>

namespace flexstate::bench {

struct BenchScenario {
  nf::NfParams nf;
  std::uint32_t cores = 1;
  std::string driver_label = "flatkvs";
  /// "local" for in-process stores. For "resp", "local" (or "loopback")
  /// starts an embedded server on 127.0.0.1 for each repetition.
  std::string endpoint = "local";
  std::chrono::microseconds flush_interval{1000};
  TrafficSpec traffic;
  /// Replay this file instead of generating flows from the seed.
  std::optional<FlowFile> flows;
  std::chrono::microseconds injected_latency{0};
  std::uint32_t repetitions = 10;
  std::string nf_id = "nf1";
  std::string instance_id = "ins1";
  OverflowPolicy overflow = OverflowPolicy::Block;
  std::size_t queue_capacity = 64 * 1024;
  /// Record per-flow egress for the NAT/LB stability checks and the flow
  /// count check. Costs a hash insert per packet.
  bool verify = true;

  /// Throws InvalidArgument / UnknownDriver.
  void validate(const DriverRegistry& registry = DriverRegistry::defaults()) const;
  /// "resp" with a local endpoint: run against an embedded server.
  bool embedded_server() const;
  std::string describe() const;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Repetition {
  std::uint64_t seed = 0;
  RunReport run;
  std::vector<CheckResult> checks;
  bool passed() const;
};

struct BenchReport {
  BenchScenario scenario;
  std::vector<Repetition> repetitions;
  double mean_pps = 0;
  double stdev_pps = 0;
  double median_pps = 0;

  bool passed() const;
  std::string to_json() const;
  std::string to_text() const;
};

/// Repetitions use seeds traffic.seed .. traffic.seed + repetitions - 1.
/// Each runs against a fresh store, drains every cache, then checks the
/// stored state with the combiners.
BenchReport run_scenario(const BenchScenario& scenario,
                         const DriverRegistry& registry = DriverRegistry::defaults());

enum class SweepAxis { Cores, Driver, Interval, Nf };
SweepAxis parse_axis(std::string_view name);
std::string_view axis_name(SweepAxis axis) noexcept;

/// Applies one sweep value to a copy of the base scenario. Driver values
/// are "label" or "label@endpoint"; interval values are microseconds.
BenchScenario apply_axis(BenchScenario base, SweepAxis axis, const std::string& value);

struct SweepCell {
  std::string value;
  std::optional<BenchReport> report;
  std::string error;
  bool best = false;  // highest mean pps of the sweep
};

struct SweepTable {
  SweepAxis axis = SweepAxis::Cores;
  std::vector<SweepCell> cells;

  bool passed() const;
  std::string to_csv() const;
  std::string to_json() const;
  std::string to_text() const;
};

/// Runs every cell; a failing cell is recorded and the sweep continues.
SweepTable sweep(SweepAxis axis, const std::vector<std::string>& values, const BenchScenario& base,
                 const DriverRegistry& registry = DriverRegistry::defaults());

double mean(const std::vector<double>& v);
double stdev(const std::vector<double>& v);
double median(std::vector<double> v);

}  // namespace flexstate::bench
