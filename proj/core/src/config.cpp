#include "flexstate/config.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "flexstate/error.hpp"

namespace flexstate {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

}  // namespace

FlexConfig parse_config(std::string_view text, const DriverRegistry& registry) {
  std::optional<std::string> nf, instance, driver, endpoint;
  std::optional<std::chrono::microseconds> interval;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto line = trim(raw);
    if (line.empty()) continue;
    if (line.back() != ';') throw Error(Errc::SyntaxError, where(line_no) + "missing ';'");

    std::size_t seg_start = 0;
    while (seg_start < line.size()) {
      auto semi = line.find(';', seg_start);
      auto segment = trim(line.substr(seg_start, semi - seg_start));
      seg_start = semi + 1;
      if (segment.empty()) throw Error(Errc::SyntaxError, where(line_no) + "empty pair");

      auto colon = segment.find(':');
      if (colon == std::string_view::npos) {
        throw Error(Errc::SyntaxError, where(line_no) + "expected 'key: value;'");
      }
      auto key = trim(segment.substr(0, colon));
      auto value = trim(segment.substr(colon + 1));
      if (key.empty() || value.empty()) {
        throw Error(Errc::SyntaxError, where(line_no) + "expected 'key: value;'");
      }

      if (key == "NF id") {
        if (!is_valid_token(value)) throw Error(Errc::InvalidToken, where(line_no) + "NF id");
        nf = std::string(value);
      } else if (key == "NF instance id") {
        if (!is_valid_token(value)) throw Error(Errc::InvalidToken, where(line_no) + "NF instance id");
        instance = std::string(value);
      } else if (key == "driver") {
        if (!registry.contains(value)) {
          throw Error(Errc::UnknownDriver, where(line_no) + "'" + std::string(value) + "'");
        }
        driver = std::string(value);
      } else if (key == "endpoint") {
        endpoint = std::string(value);
      } else if (key == "flush interval us") {
        std::int64_t us = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), us);
        if (ec != std::errc{} || ptr != value.data() + value.size() || us <= 0) {
          throw Error(Errc::BadDuration, where(line_no) + "'" + std::string(value) + "'");
        }
        interval = std::chrono::microseconds(us);
      } else {
        throw Error(Errc::SyntaxError, where(line_no) + "unknown key '" + std::string(key) + "'");
      }
    }
  }

  if (!nf) throw Error(Errc::MissingField, "NF id");
  if (!instance) throw Error(Errc::MissingField, "NF instance id");
  if (!driver) throw Error(Errc::MissingField, "driver");

  FlexConfig config;
  config.nf_id = *nf;
  config.instance_id = *instance;
  config.driver_label = *driver;
  if (endpoint) config.endpoint = *endpoint;
  if (interval) config.flush_interval = *interval;
  return config;
}

FlexConfig load_config(const std::filesystem::path& path, const DriverRegistry& registry) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), registry);
}

std::string render_config(const FlexConfig& config) {
  std::ostringstream out;
  out << "NF id: " << config.nf_id << ";\n"
      << "NF instance id: " << config.instance_id << ";\n"
      << "driver: " << config.driver_label << ";\n"
      << "endpoint: " << config.endpoint << ";\n"
      << "flush interval us: " << config.flush_interval.count() << ";\n";
  return out.str();
}

}  // namespace flexstate
