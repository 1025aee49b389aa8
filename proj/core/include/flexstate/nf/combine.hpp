#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flexstate/mutation.hpp"
#include "flexstate/store.hpp"

namespace flexstate::nf {

// Merging functions. They read the store only, through their own session,
// and need the caches drained to be exact.

/// Sum of counter `structure_id` over every core of every listed instance.
std::int64_t combine_counters(StoreSession& session, std::string_view nf_id,
                              const std::vector<std::string>& instance_ids,
                              std::string_view structure_id);

/// Key-wise sum of countermap `structure_id` over every core and instance.
CounterMapValue combine_countermaps(StoreSession& session, std::string_view nf_id,
                                    const std::vector<std::string>& instance_ids,
                                    std::string_view structure_id);

/// Per-core values of one structure, in core order.
std::vector<std::pair<std::uint32_t, Snapshot>> per_core(StoreSession& session, std::string_view nf_id,
                                                         std::string_view instance_id,
                                                         StructureType type, std::string_view structure_id);

std::string counter_json(std::string_view structure_id, std::int64_t total);
std::string countermap_json(std::string_view structure_id, const CounterMapValue& totals);

}  // namespace flexstate::nf
