#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flexstate/key.hpp"
#include "flexstate/mutation.hpp"

namespace flexstate {

using ScanResult = std::vector<std::pair<StoreKey, Snapshot>>;

/// One independent conversation with a data store. A session is used by a
/// single thread at a time; different sessions never block each other at
/// the contract level.
///
/// apply() returns only after every mutation of the batch is applied, in
/// order. A batch with a non-zero sequence number is applied at most once
/// per session: re-submitting it after a ConnectionLost is safe.
class StoreSession {
 public:
  virtual ~StoreSession() = default;

  virtual std::uint64_t id() const noexcept = 0;
  virtual void apply(const MutationBatch& batch) = 0;
  virtual Snapshot fetch(const StoreKey& key) = 0;
  /// Every structure of every core of one NF instance, ordered by key.
  virtual ScanResult scan_prefix(std::string_view nf_id, std::string_view instance_id) = 0;
};

/// A data-store driver: translates StoreKey-addressed operations into one
/// store's command language and data layout.
class StoreDriver {
 public:
  virtual ~StoreDriver() = default;

  virtual std::string_view label() const noexcept = 0;
  virtual std::unique_ptr<StoreSession> open_session() = 0;
};

using DriverFactory = std::function<std::unique_ptr<StoreDriver>(std::string_view endpoint)>;

/// Maps configuration labels to driver factories. New drivers integrate by
/// registering a label here.
class DriverRegistry {
 public:
  void add(std::string label, DriverFactory factory);
  bool contains(std::string_view label) const;
  std::vector<std::string> labels() const;
  /// Throws Errc::UnknownDriver for unregistered labels.
  std::unique_ptr<StoreDriver> create(std::string_view label, std::string_view endpoint) const;

  /// Registry holding "flatkvs", "tablestore" and "resp".
  static const DriverRegistry& defaults();

 private:
  std::map<std::string, DriverFactory, std::less<>> factories_;
};

}  // namespace flexstate
