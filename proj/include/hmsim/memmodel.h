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

/**
 * @file memmodel.h
 * @brief Device tiers, the last-level-cache filter and the epoch timing model.
 *
 * Only LLC read misses and dirty evictions reach a memory device. The timing
 * model turns per-tier aggregates of those events (plus page migration bytes)
 * into busy time:
 *
 *   busy = max(latency_work / overlap, read_bytes / read_bw, wb_bytes / wb_bw)
 *
 * where overlap = mlp x concurrent workers and bandwidths are per-channel
 * figures multiplied by the channel count. An epoch takes as long as its
 * busiest tier plus the workload's compute time.
 */

#ifndef HMSIM_MEMMODEL_H
#define HMSIM_MEMMODEL_H

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hmsim/common.h"

namespace hmsim
{
struct DeviceTier {
  std::string name;
  double read_latency_ns = 0;
  // Latency of an access whose miss also forces a write-back to this device.
  double writeback_latency_ns = 0;
  double read_bandwidth_per_channel = 0; // bytes/s
  double writeback_bandwidth_per_channel = 0;
  unsigned channels = 1;
  std::uint64_t capacity_bytes = page_size;

  double read_bandwidth() const noexcept { return read_bandwidth_per_channel * channels; }
  double writeback_bandwidth() const noexcept { return writeback_bandwidth_per_channel * channels; }
  std::uint64_t capacity_pages() const noexcept { return capacity_bytes / page_size; }

  // Extra latency a write-back adds on top of a plain read miss.
  double writeback_penalty_ns() const noexcept;

  void validate() const;

  friend bool operator==(const DeviceTier&, const DeviceTier&) = default;
};

// Shipped presets: "dram-interleaved", "dcpmm-interleaved", "dcpmm-noninterleaved".
DeviceTier tier_preset(std::string_view name);
std::vector<std::string> tier_preset_names();

struct CacheConfig {
  static constexpr unsigned fully_associative = 0;

  std::uint64_t llc_capacity = 36 * MiB;
  std::uint64_t line_size = cacheline_size;
  unsigned associativity = 16;
  double mlp = 1.0;

  std::uint64_t lines() const noexcept { return llc_capacity / line_size; }
  std::uint64_t ways() const noexcept;
  std::uint64_t sets() const noexcept;

  void validate() const;
};

enum class MissKind : std::uint8_t {
  read_miss = 0,
  writeback = 1,
  // Page copy traffic from relocations or cache fills; counts are in cachelines.
  migration_read = 2,
  migration_write = 3,
};
std::string_view to_string(MissKind k) noexcept;

struct MissRecord {
  PageIndex page = 0;
  Tier tier = Tier::slow;
  MissKind kind = MissKind::read_miss;
  std::uint64_t count = 1;

  friend bool operator==(const MissRecord&, const MissRecord&) = default;
};

// Appends, merging with the last record when page, tier and kind all match.
void append_record(std::vector<MissRecord>& out, const MissRecord& rec);

/**
 * Set-associative write-back, write-allocate LLC with true LRU replacement
 * within a set. Lines are indexed by guest-physical address, so they survive
 * page relocations; a dirty line's write-back is charged to wherever its page
 * lives when it is evicted.
 */
class LastLevelCache
{
public:
  struct Outcome {
    bool miss = false;
    bool writeback = false;
    std::uint64_t victim_line = 0;
  };

  LastLevelCache(const CacheConfig& config, std::uint64_t address_limit);

  Outcome access(const AccessEvent& ev);

  std::uint64_t resident_lines() const noexcept;
  std::uint64_t dirty_lines() const noexcept;
  const CacheConfig& config() const noexcept { return config_; }

private:
  Outcome access_set_associative(std::uint64_t line, bool write);
  Outcome access_fully_associative(std::uint64_t line, bool write);

  CacheConfig config_;
  std::uint64_t address_limit_;
  std::uint64_t sets_;
  std::uint64_t ways_;

  // set-associative state, indexed [set * ways + way]; tag 0 marks an empty way
  std::vector<std::uint64_t> tags_;
  std::vector<std::uint64_t> stamps_;
  std::vector<std::uint8_t> dirty_;
  std::uint64_t clock_ = 0;

  // fully-associative state: intrusive LRU list over slots plus a line index
  struct Slot {
    std::uint64_t line = 0;
    std::uint32_t prev = 0;
    std::uint32_t next = 0;
    bool dirty = false;
  };
  static constexpr std::uint32_t nil = UINT32_MAX;
  std::vector<Slot> slots_;
  std::unordered_map<std::uint64_t, std::uint32_t> where_;
  std::uint32_t head_ = nil; // MRU
  std::uint32_t tail_ = nil; // LRU
  void unlink(std::uint32_t s);
  void push_front(std::uint32_t s);
};

using TierResolver = std::function<Tier(PageIndex)>;

// Runs a trace through a cold LLC and returns read misses and dirty
// evictions in trace order. Without a resolver every record is tagged slow.
std::vector<MissRecord> llc_filter(std::span<const AccessEvent> trace, const CacheConfig& cache,
                                   std::uint64_t address_limit, const TierResolver& tier_of = {});

struct TierDemand {
  std::uint64_t read_misses = 0;
  std::uint64_t writebacks = 0;
  std::uint64_t migration_read_bytes = 0;
  std::uint64_t migration_write_bytes = 0;

  std::uint64_t read_bytes() const noexcept { return read_misses * cacheline_size + migration_read_bytes; }
  std::uint64_t writeback_bytes() const noexcept { return writebacks * cacheline_size + migration_write_bytes; }

  void add(const MissRecord& rec) noexcept;

  friend bool operator==(const TierDemand&, const TierDemand&) = default;
};

using DemandByTier = std::array<TierDemand, tier_count>;
DemandByTier aggregate(std::span<const MissRecord> records);

// Busy time of a single tier given the number of overlapping requests.
double tier_busy_ns(const TierDemand& demand, const DeviceTier& tier, double overlap);

// Simulated duration of an epoch. `concurrency` is the number of workers
// issuing misses in parallel; each contributes `cache.mlp` outstanding misses.
double epoch_time(std::span<const TierDemand> demand, std::span<const DeviceTier> tiers, const CacheConfig& cache,
                  double compute_ns, unsigned concurrency = 1);

} // namespace hmsim

#endif
