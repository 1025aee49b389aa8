#include "flexstate/trafficgen.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "flexstate/error.hpp"

namespace flexstate {

void TrafficSpec::validate() const {
  if (n_flows == 0) throw Error(Errc::InvalidArgument, "n_flows must be at least 1");
  if (packet_size < kMinPacketSize) {
    throw Error(Errc::InvalidArgument, "packet size " + std::to_string(packet_size) + " < " +
                                           std::to_string(kMinPacketSize));
  }
}

std::string FlowFile::render() const {
  std::string out(kFlowFileHeader);
  out.push_back('\n');
  for (const auto& f : flows_) {
    out += format_ipv4(f.src_ip);
    out += ',';
    out += format_ipv4(f.dst_ip);
    out += ',';
    out += std::to_string(f.src_port);
    out += ',';
    out += std::to_string(f.dst_port);
    out += ',';
    out += std::to_string(f.proto);
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
T parse_number(std::string_view s, std::size_t line_no) {
  unsigned long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() ||
      v > std::numeric_limits<T>::max()) {
    throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return static_cast<T>(v);
}

}  // namespace

FlowFile FlowFile::parse(std::string_view text) {
  std::vector<FlowKey> flows;
  std::unordered_set<FlowKey, FlowKeyHash> seen;
  std::size_t line_no = 0;
  bool header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header) {
      if (line != kFlowFileHeader) throw Error(Errc::ParseError, "missing 'flexstate-flows v1' header");
      header = true;
      continue;
    }
    if (line.empty()) continue;

    std::string_view fields[5];
    std::size_t start = 0;
    for (int i = 0; i < 5; ++i) {
      auto comma = line.find(',', start);
      if ((i < 4) == (comma == std::string_view::npos)) {
        throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": expected 5 fields");
      }
      fields[i] = line.substr(start, i < 4 ? comma - start : std::string_view::npos);
      start = comma + 1;
    }
    FlowKey f;
    try {
      f.src_ip = parse_ipv4(fields[0]);
      f.dst_ip = parse_ipv4(fields[1]);
    } catch (const Error& e) {
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    f.src_port = parse_number<std::uint16_t>(fields[2], line_no);
    f.dst_port = parse_number<std::uint16_t>(fields[3], line_no);
    f.proto = parse_number<std::uint8_t>(fields[4], line_no);
    if (!seen.insert(f).second) {
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": duplicate flow");
    }
    flows.push_back(f);
  }
  if (!header) throw Error(Errc::ParseError, "empty flow file");
  if (flows.empty()) throw Error(Errc::ParseError, "flow file has no flows");
  return FlowFile(std::move(flows));
}

void FlowFile::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::InvalidArgument, "cannot write " + path.string());
  out << render();
}

FlowFile FlowFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

FlowFile generate_flows(const TrafficSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  // 198.18.0.0/15 (RFC 2544 benchmarking addresses)
  std::uniform_int_distribution<std::uint32_t> addr(0xC6120000u, 0xC613FFFFu);
  std::uniform_int_distribution<std::uint32_t> port(1024, 65535);

  std::vector<FlowKey> flows;
  flows.reserve(spec.n_flows);
  std::unordered_set<FlowKey, FlowKeyHash> seen;
  seen.reserve(spec.n_flows);
  while (flows.size() < spec.n_flows) {
    FlowKey f;
    f.src_ip = addr(rng);
    f.dst_ip = addr(rng);
    f.src_port = static_cast<std::uint16_t>(port(rng));
    f.dst_port = static_cast<std::uint16_t>(port(rng));
    f.proto = 6;
    if (seen.insert(f).second) flows.push_back(f);
  }
  return FlowFile(std::move(flows));
}

ReplaySource::ReplaySource(const FlowFile& flows, const TrafficSpec& spec)
    : flows_(flows.flows()), packet_size_(spec.packet_size) {
  spec.validate();
  if (flows.empty()) throw Error(Errc::ParseError, "cannot replay an empty flow file");
  if (spec.packet_budget) {
    budget_ = spec.packet_budget;
  } else if (spec.duration) {
    duration_ = spec.duration;
  } else {
    throw Error(Errc::InvalidArgument, "replay needs a packet budget or a duration");
  }
}

bool ReplaySource::next(Packet& out) {
  if (budget_) {
    if (emitted_ >= *budget_) return false;
  } else {
    // the clock starts at the first packet; checked every 1024 packets
    if (!deadline_) {
      deadline_ = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(*duration_);
    }
    if ((emitted_ & 1023) == 0 && std::chrono::steady_clock::now() >= *deadline_) return false;
  }
  out.flow = flows_[cursor_];
  out.size = packet_size_;
  out.tag = 0;
  if (++cursor_ == flows_.size()) cursor_ = 0;
  ++emitted_;
  return true;
}

}  // namespace flexstate
