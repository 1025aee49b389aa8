#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>

#include "flexstate/store.hpp"

namespace flexstate {

/// Operator configuration: which driver to use, where the store lives,
/// how often caches flush, and the identity of this NF instance.
struct FlexConfig {
  std::string driver_label;
  std::string endpoint = "local";
  std::chrono::microseconds flush_interval{1000};
  std::string nf_id;
  std::string instance_id;

  friend bool operator==(const FlexConfig&, const FlexConfig&) = default;
};

/// Parses "key: value;" pairs, one or more per line, '#' starting a
/// comment. Recognised keys: "NF id", "NF instance id", "driver",
/// "endpoint", "flush interval us". Unknown keys are a SyntaxError.
FlexConfig parse_config(std::string_view text,
                        const DriverRegistry& registry = DriverRegistry::defaults());

FlexConfig load_config(const std::filesystem::path& path,
                       const DriverRegistry& registry = DriverRegistry::defaults());

std::string render_config(const FlexConfig& config);

}  // namespace flexstate
