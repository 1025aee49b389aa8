#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flexstate/packet.hpp"
#include "flexstate/runtime.hpp"

namespace flexstate {

struct TrafficSpec {
  std::uint32_t n_flows = 50'000;
  std::uint32_t packet_size = kDefaultPacketSize;
  std::uint64_t seed = 1;
  /// Exactly one of these bounds the replay; a budget wins if both are set.
  std::optional<std::uint64_t> packet_budget;
  std::optional<std::chrono::duration<double>> duration = std::chrono::seconds(15);

  /// Throws InvalidArgument when n_flows == 0 or packet_size < 54.
  void validate() const;
};

/// An ordered set of unique flows. Text form:
///   flexstate-flows v1
///   src_ip,dst_ip,src_port,dst_port,proto
class FlowFile {
 public:
  FlowFile() = default;
  explicit FlowFile(std::vector<FlowKey> flows) : flows_(std::move(flows)) {}

  const std::vector<FlowKey>& flows() const noexcept { return flows_; }
  std::size_t size() const noexcept { return flows_.size(); }
  bool empty() const noexcept { return flows_.empty(); }

  std::string render() const;
  /// Throws ParseError for a bad header, bad line, duplicate or empty file.
  static FlowFile parse(std::string_view text);

  void save(const std::filesystem::path& path) const;
  static FlowFile load(const std::filesystem::path& path);

  friend bool operator==(const FlowFile&, const FlowFile&) = default;

 private:
  std::vector<FlowKey> flows_;
};

inline constexpr std::string_view kFlowFileHeader = "flexstate-flows v1";

/// Random TCP 5-tuples from the 198.18.0.0/15 benchmarking range with
/// random ports; deterministic for a seed, unique flows.
FlowFile generate_flows(const TrafficSpec& spec);

/// Cycles through the flows in order until the budget or duration is
/// reached. Throws ParseError for an empty flow file.
class ReplaySource final : public PacketSource {
 public:
  ReplaySource(const FlowFile& flows, const TrafficSpec& spec);

  bool next(Packet& out) override;
  std::uint64_t emitted() const noexcept { return emitted_; }

 private:
  const std::vector<FlowKey>& flows_;
  std::uint32_t packet_size_;
  std::optional<std::uint64_t> budget_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  std::optional<std::chrono::duration<double>> duration_;
  std::size_t cursor_ = 0;
  std::uint64_t emitted_ = 0;
};

}  // namespace flexstate
