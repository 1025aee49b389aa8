#include "flexstate/drivers/drivers.hpp"
#include "flexstate/error.hpp"
#include "flexstate/store.hpp"

namespace flexstate {

void DriverRegistry::add(std::string label, DriverFactory factory) {
  factories_.insert_or_assign(std::move(label), std::move(factory));
}

bool DriverRegistry::contains(std::string_view label) const {
  return factories_.find(label) != factories_.end();
}

std::vector<std::string> DriverRegistry::labels() const {
  std::vector<std::string> out;
  for (const auto& [label, f] : factories_) out.push_back(label);
  return out;
}

std::unique_ptr<StoreDriver> DriverRegistry::create(std::string_view label,
                                                    std::string_view endpoint) const {
  auto it = factories_.find(label);
  if (it == factories_.end()) throw Error(Errc::UnknownDriver, "'" + std::string(label) + "'");
  return it->second(endpoint);
}

namespace {

void require_local(std::string_view label, std::string_view endpoint) {
  if (endpoint != "local") {
    throw Error(Errc::InvalidArgument,
                std::string(label) + " runs in-process and only accepts endpoint 'local'");
  }
}

DriverRegistry make_defaults() {
  DriverRegistry registry;
  registry.add("flatkvs", [](std::string_view endpoint) -> std::unique_ptr<StoreDriver> {
    require_local("flatkvs", endpoint);
    return std::make_unique<FlatKvsDriver>();
  });
  registry.add("tablestore", [](std::string_view endpoint) -> std::unique_ptr<StoreDriver> {
    require_local("tablestore", endpoint);
    return std::make_unique<TableStoreDriver>();
  });
  registry.add("resp", [](std::string_view endpoint) -> std::unique_ptr<StoreDriver> {
    return RespDriver::from_endpoint(endpoint);
  });
  return registry;
}

}  // namespace

const DriverRegistry& DriverRegistry::defaults() {
  static const DriverRegistry registry = make_defaults();
  return registry;
}

}  // namespace flexstate
