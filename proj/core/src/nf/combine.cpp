#include "flexstate/nf/combine.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "flexstate/error.hpp"
#include "flexstate/types.hpp"

namespace flexstate::nf {

namespace {

template <typename Fn>
void for_each_partition(StoreSession& session, std::string_view nf_id,
                        const std::vector<std::string>& instance_ids, StructureType type,
                        std::string_view structure_id, Fn&& fn) {
  for (const auto& inst : instance_ids) {
    for (const auto& [key, snap] : session.scan_prefix(nf_id, inst)) {
      if (key.type == type && key.structure_id == structure_id) fn(key, snap);
    }
  }
}

}  // namespace

std::int64_t combine_counters(StoreSession& session, std::string_view nf_id,
                              const std::vector<std::string>& instance_ids,
                              std::string_view structure_id) {
  std::int64_t total = 0;
  for_each_partition(session, nf_id, instance_ids, StructureType::Counter, structure_id,
                     [&](const StoreKey&, const Snapshot& s) {
                       if (auto v = std::get_if<std::int64_t>(&s)) total = checked_add(total, *v);
                     });
  return total;
}

CounterMapValue combine_countermaps(StoreSession& session, std::string_view nf_id,
                                    const std::vector<std::string>& instance_ids,
                                    std::string_view structure_id) {
  CounterMapValue out;
  for_each_partition(session, nf_id, instance_ids, StructureType::CounterMap, structure_id,
                     [&](const StoreKey&, const Snapshot& s) {
                       if (auto m = std::get_if<CounterMapValue>(&s)) {
                         for (const auto& [k, v] : *m) out[k] = checked_add(out[k], v);
                       }
                     });
  return out;
}

std::vector<std::pair<std::uint32_t, Snapshot>> per_core(StoreSession& session, std::string_view nf_id,
                                                         std::string_view instance_id,
                                                         StructureType type, std::string_view structure_id) {
  std::vector<std::pair<std::uint32_t, Snapshot>> out;
  for_each_partition(session, nf_id, {std::string(instance_id)}, type, structure_id,
                     [&](const StoreKey& k, const Snapshot& s) { out.emplace_back(k.core_id, s); });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::string counter_json(std::string_view structure_id, std::int64_t total) {
  return nlohmann::json{{"structure", structure_id}, {"total", total}}.dump();
}

std::string countermap_json(std::string_view structure_id, const CounterMapValue& totals) {
  nlohmann::json t = nlohmann::json::object();
  for (const auto& [k, v] : totals) t[k] = v;
  return nlohmann::json{{"structure", structure_id}, {"totals", t}}.dump();
}

}  // namespace flexstate::nf
