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

#include "hmsim/optimizer.h"

#include <algorithm>
#include <numeric>

#include <fmt/core.h>

namespace hmsim
{
std::string_view to_string(PolicyKind k) noexcept
{
  switch (k) {
  case PolicyKind::raminate:
    return "raminate";
  case PolicyKind::none:
    return "none";
  case PolicyKind::dram_cache:
    return "dram_cache";
  case PolicyKind::static_oracle:
    return "static_oracle";
  }
  return "?";
}

PolicyKind parse_policy(std::string_view name)
{
  for (auto k : {PolicyKind::raminate, PolicyKind::none, PolicyKind::dram_cache, PolicyKind::static_oracle})
    if (name == to_string(k))
      return k;
  throw SpecError(fmt::format("unknown policy '{}' (expected raminate, none, dram_cache or static_oracle)", name));
}

void PolicyConfig::validate() const
{
  if (!(interval_s > 0))
    throw SpecError("policy interval must be positive");
  if (!(hysteresis_margin >= 0))
    throw SpecError("hysteresis margin must be nonnegative");
}

SwapPlan plan_swaps(const Rankings& rankings, const PolicyConfig& config, std::uint64_t epoch_index)
{
  SwapPlan plan;
  plan.epoch_index = epoch_index;
  const auto n = std::min({config.max_pairs, rankings.hot_slow.size(), rankings.cold_fast.size()});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& hot = rankings.hot_slow[i];
    const auto& cold = rankings.cold_fast[i];
    if (!(hot.score > cold.score + config.hysteresis_margin))
      break;
    plan.pairs.push_back({hot.page, cold.page});
  }
  return plan;
}

Placement static_oracle(std::span<const double> total_heat, const PageMapping& mapping)
{
  if (total_heat.size() != mapping.page_count())
    throw SpecError("heat and mapping cover different page ranges");

  std::vector<PageIndex> order(total_heat.size());
  std::iota(order.begin(), order.end(), PageIndex{0});
  const auto fast_slots = mapping.pages_on(Tier::fast);
  auto hotter = [&](PageIndex a, PageIndex b) {
    return total_heat[a] > total_heat[b] || (total_heat[a] == total_heat[b] && a < b);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(fast_slots), order.end(), hotter);

  Placement placement(total_heat.size(), Tier::slow);
  for (std::uint64_t i = 0; i < fast_slots; ++i)
    placement[order[i]] = Tier::fast;
  return placement;
}

double slow_tier_heat(std::span<const double> total_heat, const Placement& placement)
{
  double sum = 0;
  for (std::size_t p = 0; p < placement.size(); ++p)
    if (placement[p] == Tier::slow)
      sum += total_heat[p];
  return sum;
}

Placement placement_of(const PageMapping& mapping)
{
  Placement out;
  out.reserve(mapping.page_count());
  for (const auto& f : mapping.entries())
    out.push_back(f.tier);
  return out;
}

SwapPlan plan_to_placement(const PageMapping& mapping, const Placement& target)
{
  if (target.size() != mapping.page_count())
    throw SpecError("target placement covers a different page range");
  std::vector<PageIndex> promote, demote;
  for (PageIndex p = 0; p < target.size(); ++p) {
    const auto now = mapping.tier_of(p);
    if (now == Tier::slow && target[p] == Tier::fast)
      promote.push_back(p);
    else if (now == Tier::fast && target[p] == Tier::slow)
      demote.push_back(p);
  }
  if (promote.size() != demote.size())
    throw CapacityError("target placement changes the number of fast pages");

  SwapPlan plan;
  for (std::size_t i = 0; i < promote.size(); ++i)
    plan.pairs.push_back({promote[i], demote[i]});
  return plan;
}

DramCache::DramCache(std::uint64_t cache_pages) : slots_(cache_pages) {}

void DramCache::apply(const MissRecord& rec, std::vector<MissRecord>& out)
{
  if (rec.kind != MissKind::read_miss && rec.kind != MissKind::writeback) {
    out.push_back(rec);
    return;
  }
  if (slots_.empty()) {
    ++misses_;
    append_record(out, {rec.page, Tier::slow, rec.kind, rec.count});
    return;
  }

  auto& slot = slots_[rec.page % slots_.size()];
  if (slot.valid && slot.page == rec.page) {
    hits_ += rec.count;
  } else {
    ++misses_;
    hits_ += rec.count - 1;
    if (slot.valid && slot.dirty) {
      ++dirty_evictions_;
      out.push_back({slot.page, Tier::fast, MissKind::migration_read, lines_per_page});
      out.push_back({slot.page, Tier::slow, MissKind::migration_write, lines_per_page});
    }
    out.push_back({rec.page, Tier::slow, MissKind::migration_read, lines_per_page});
    out.push_back({rec.page, Tier::fast, MissKind::migration_write, lines_per_page});
    slot = {rec.page, true, false};
  }
  slot.dirty = slot.dirty || rec.kind == MissKind::writeback;
  append_record(out, {rec.page, Tier::fast, rec.kind, rec.count});
}

DramCacheResult dram_cache_policy(std::span<const MissRecord> miss_stream, std::uint64_t cache_pages)
{
  DramCache cache(cache_pages);
  DramCacheResult result;
  for (const auto& r : miss_stream)
    cache.apply(r, result.records);
  result.hits = cache.hits();
  result.misses = cache.misses();
  return result;
}

} // namespace hmsim
