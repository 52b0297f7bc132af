/*
 *    Copyright 2026 The hmsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HMSIM_OPTIMIZER_H
#define HMSIM_OPTIMIZER_H

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hmsim/mapping.h"
#include "hmsim/memmodel.h"
#include "hmsim/monitor.h"

namespace hmsim
{
enum class PolicyKind : std::uint8_t { raminate, none, dram_cache, static_oracle };
std::string_view to_string(PolicyKind k) noexcept;
PolicyKind parse_policy(std::string_view name);

struct PolicyConfig {
  std::size_t max_pairs = 1000;
  double interval_s = 5.0;
  double hysteresis_margin = 0.0;
  PolicyKind kind = PolicyKind::raminate;

  void validate() const;
};

struct SwapPlan {
  // (hot slow page, cold fast page)
  std::vector<PagePair> pairs;
  std::uint64_t epoch_index = 0;
};

/**
 * Pairs the i-th hottest slow page with the i-th coldest fast page and keeps
 * the pair while the hot page beats the cold one by more than the hysteresis
 * margin. Both lists are sorted, so the first failing rank ends the plan.
 */
SwapPlan plan_swaps(const Rankings& rankings, const PolicyConfig& config, std::uint64_t epoch_index = 0);

// Per-page tier assignment.
using Placement = std::vector<Tier>;

/**
 * Offline placement from whole-run heat: the hottest pages (ties to the lower
 * index) fill as many fast frames as the mapping currently has on the fast
 * tier.
 */
Placement static_oracle(std::span<const double> total_heat, const PageMapping& mapping);

// Heat landing on the slow tier under a placement.
double slow_tier_heat(std::span<const double> total_heat, const Placement& placement);

Placement placement_of(const PageMapping& mapping);

// Swap plan that turns the mapping's current placement into `target`.
SwapPlan plan_to_placement(const PageMapping& mapping, const Placement& target);

/**
 * Emulation of a hardware DRAM cache in front of the slow tier: the fast tier
 * is a direct-mapped, page-granular cache indexed by guest page modulo the
 * number of cache pages. All backing storage lives on the slow tier.
 */
class DramCache
{
public:
  explicit DramCache(std::uint64_t cache_pages);

  // Appends the attributed access (always fast) plus any fill or dirty
  // eviction traffic. Migration records pass through unchanged.
  void apply(const MissRecord& rec, std::vector<MissRecord>& out);

  std::uint64_t cache_pages() const noexcept { return slots_.size(); }
  std::uint64_t hits() const noexcept { return hits_; }
  std::uint64_t misses() const noexcept { return misses_; }
  std::uint64_t dirty_evictions() const noexcept { return dirty_evictions_; }

private:
  struct Slot {
    PageIndex page = 0;
    bool valid = false;
    bool dirty = false;
  };
  std::vector<Slot> slots_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t dirty_evictions_ = 0;
};

struct DramCacheResult {
  std::vector<MissRecord> records;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
};

DramCacheResult dram_cache_policy(std::span<const MissRecord> miss_stream, std::uint64_t cache_pages);

} // namespace hmsim

#endif
