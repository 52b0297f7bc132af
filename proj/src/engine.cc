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

#include "hmsim/engine.h"

#include <cmath>
#include <utility>

#include <fmt/core.h>

namespace hmsim
{
void RunConfig::validate() const
{
  for (const auto& t : tiers)
    t.validate();
  cache.validate();
  policy.validate();
  heat.validate();
  workload.validate();
  if (ram_bytes == 0 || ram_bytes % page_size != 0)
    throw SpecError(fmt::format("RAM size {} is not a positive multiple of {}", ram_bytes, page_size));
  if (!(fast_ratio >= 0 && fast_ratio <= 1))
    throw SpecError("fast_ratio must lie in [0, 1]");
  if (epochs < 1)
    throw SpecError("a run needs at least one epoch");
  if (workload.kind != WorkloadKind::external && workload.footprint_bytes() > ram_bytes)
    throw SpecError(fmt::format("workload footprint of {} bytes exceeds {} bytes of RAM", workload.footprint_bytes(),
                                ram_bytes));
}

double EpochStats::slow_share() const noexcept
{
  const auto slow = static_cast<double>(tier(Tier::slow).traffic_bytes());
  const auto total = slow + static_cast<double>(tier(Tier::fast).traffic_bytes());
  return total > 0 ? slow / total : 0.0;
}

SimulationError::SimulationError(const std::string& what, std::uint64_t epoch_index, RunResult partial)
    : Error(what), epoch_index_(epoch_index), partial_(std::move(partial))
{
}

PageMapping initial_mapping(const RunConfig& config)
{
  // the DRAM cache keeps every page on the slow tier and uses the fast tier
  // only as cache frames
  const double ratio = config.policy.kind == PolicyKind::dram_cache ? 0.0 : config.fast_ratio;
  return create_mapping(config.ram_bytes, ratio, config.tier(Tier::fast), config.tier(Tier::slow));
}

namespace
{
std::uint64_t page_count(const RunConfig& config) { return config.ram_bytes / page_size; }

// Feeds one event through the LLC and appends its memory-side records.
template <typename Emit>
void filter_event(LastLevelCache& llc, const AccessEvent& ev, const PageMapping& mapping, Emit&& emit)
{
  const auto out = llc.access(ev);
  if (out.miss) {
    const auto page = page_of(ev.address);
    emit(MissRecord{page, mapping.tier_of(page), MissKind::read_miss, 1});
  }
  if (out.writeback) {
    const auto page = out.victim_line / lines_per_page;
    emit(MissRecord{page, mapping.tier_of(page), MissKind::writeback, 1});
  }
}

TierStats tier_stats(const TierDemand& d)
{
  return {d.read_bytes(), d.writeback_bytes(), d.read_misses, d.writebacks,
          d.migration_read_bytes + d.migration_write_bytes};
}
} // namespace

std::vector<double> offline_heat(const RunConfig& config, TraceSource& source)
{
  const PageMapping all_slow(page_count(config), 0, 0, page_count(config));
  LastLevelCache llc(config.cache, config.ram_bytes);
  HeatConfig exact = config.heat;
  exact.sampled = false;
  PageHeat heat(page_count(config), exact);

  Trace events;
  std::vector<MissRecord> records;
  while (source.next_epoch(events)) {
    records.clear();
    for (const auto& ev : events)
      filter_event(llc, ev, all_slow, [&](const MissRecord& r) { append_record(records, r); });
    heat.record(records);
  }
  return {heat.counts().begin(), heat.counts().end()};
}

RunResult run(const RunConfig& config, const EpochObserver& observer)
{
  return run(config, [&] { return make_source(config.workload, config.ram_bytes); }, observer);
}

RunResult run(const RunConfig& config, const SourceFactory& make, const EpochObserver& observer)
{
  RunResult result;
  auto& summary = result.summary;
  summary.label = config.label;
  summary.policy = config.policy.kind;
  summary.fast_ratio = config.fast_ratio;

  std::uint64_t epoch = 0;
  auto fail = [&](const std::string& what) -> SimulationError {
    return SimulationError(fmt::format("epoch {}: {}", epoch, what), epoch, result);
  };

  try {
    config.validate();
  } catch (const Error& e) {
    throw fail(e.what());
  }

  const auto pages = page_count(config);
  const auto kind = config.policy.kind;
  const double compute_per_event = config.workload.compute_ns_per_event;
  const unsigned workers = config.workload.workers;
  const double interval = config.interval_ns();

  std::unique_ptr<TraceSource> source;
  std::unique_ptr<LastLevelCache> llc;
  std::unique_ptr<PageHeat> heat;
  std::unique_ptr<DramCache> dram_cache;
  try {
    result.mapping = initial_mapping(config);
    if (kind == PolicyKind::static_oracle) {
      auto offline = make();
      const auto total = offline_heat(config, *offline);
      const auto plan = plan_to_placement(result.mapping, static_oracle(total, result.mapping));
      // placed before the run starts, so no copy traffic is charged
      result.mapping.apply_swaps(plan.pairs);
      result.mapping = PageMapping::from_entries({result.mapping.entries().begin(), result.mapping.entries().end()},
                                                 result.mapping.capacity_pages(Tier::fast),
                                                 result.mapping.capacity_pages(Tier::slow));
    }
    if (kind == PolicyKind::dram_cache) {
      const auto cache_pages = static_cast<std::uint64_t>(std::llround(config.fast_ratio * static_cast<double>(pages)));
      if (cache_pages > config.tier(Tier::fast).capacity_pages())
        throw CapacityError(fmt::format("DRAM cache of {} pages exceeds the fast tier", cache_pages));
      dram_cache = std::make_unique<DramCache>(cache_pages);
    }
    source = make();
    llc = std::make_unique<LastLevelCache>(config.cache, config.ram_bytes);
    heat = std::make_unique<PageHeat>(pages, config.heat);
  } catch (const Error& e) {
    throw fail(e.what());
  }

  auto& mapping = result.mapping;
  Trace buffer;
  std::size_t pos = 0;
  bool exhausted = false;
  auto refill = [&] {
    while (pos >= buffer.size()) {
      if (exhausted || !source->next_epoch(buffer)) {
        exhausted = true;
        return false;
      }
      pos = 0;
    }
    return true;
  };

  std::vector<MissRecord> misses, charged, scratch;
  SwapPlan plan;
  double cumulative = 0;

  for (;; ++epoch) {
    if (!config.closed_loop && epoch >= config.epochs)
      break;
    try {
      if (!config.closed_loop) {
        buffer.clear();
        pos = 0;
      }
      if (!refill())
        break;
      if (config.closed_loop && epoch >= config.epochs)
        throw SpecError(fmt::format("closed-loop work not finished after {} epochs", config.epochs));

      misses.clear();
      charged.clear();
      DemandByTier demand{};
      EpochStats stats;
      stats.epoch_index = epoch;

      auto charge = [&](const MissRecord& r) {
        demand[index_of(r.tier)].add(r);
        append_record(charged, r);
      };
      auto on_miss = [&](const MissRecord& r) {
        append_record(misses, r);
        if (!dram_cache) {
          charge(r);
          return;
        }
        scratch.clear();
        dram_cache->apply(r, scratch);
        for (const auto& c : scratch) {
          if (c.kind == MissKind::migration_write && c.tier == Tier::fast)
            ++stats.cache_fills;
          charge(c);
        }
      };

      if (config.closed_loop) {
        do {
          filter_event(*llc, buffer[pos++], mapping, on_miss);
          ++stats.events;
          const auto t = epoch_time(demand, config.tiers, config.cache,
                                    compute_per_event * static_cast<double>(stats.events), workers);
          if (t >= interval)
            break;
        } while (refill());
      } else {
        for (; pos < buffer.size(); ++pos)
          filter_event(*llc, buffer[pos], mapping, on_miss);
        stats.events = buffer.size();
      }

      if (config.heat.sampled)
        heat->sampled_record(misses);
      else
        heat->record(misses);
      heat->end_epoch();

      plan = SwapPlan{{}, epoch};
      if (kind == PolicyKind::raminate) {
        plan = plan_swaps(rank(*heat, mapping, config.policy.max_pairs), config.policy, epoch);
        for (const auto& r : swap_pages(mapping, plan.pairs))
          charge(r);
      }
      stats.relocations = plan.pairs.size();

      stats.simulated_time_ns = epoch_time(demand, config.tiers, config.cache,
                                           compute_per_event * static_cast<double>(stats.events), workers);
      cumulative += stats.simulated_time_ns;
      stats.cumulative_time_ns = cumulative;
      for (auto t : all_tiers)
        stats.tiers[index_of(t)] = tier_stats(demand[index_of(t)]);

      summary.epochs += 1;
      summary.events += stats.events;
      summary.relocations += stats.relocations;
      summary.total_time_ns = cumulative;
      result.epochs.push_back(stats);

      if (observer)
        observer(EpochView{result.epochs.back(), misses, charged, plan, mapping, *heat});
    } catch (const SimulationError&) {
      throw;
    } catch (const Error& e) {
      summary.mapping_digest = mapping.digest();
      throw fail(e.what());
    }
  }

  summary.mapping_digest = mapping.digest();
  return result;
}

} // namespace hmsim
