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
 * @file engine.h
 * @brief The epoch loop.
 *
 * Each epoch: pull events, filter them through the LLC, attribute the misses
 * to tiers through the current mapping, record heat, let the policy plan and
 * apply swaps (their copy traffic is charged to this epoch; the new mapping
 * takes effect from the next one), then time the epoch.
 *
 * Open loop: one epoch per generator epoch, whatever its duration.
 * Closed loop: an epoch closes as soon as its simulated time reaches the
 * policy interval, and the run ends when the workload is exhausted, so the
 * total simulated time measures how long the fixed work took.
 */

#ifndef HMSIM_ENGINE_H
#define HMSIM_ENGINE_H

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hmsim/common.h"
#include "hmsim/mapping.h"
#include "hmsim/memmodel.h"
#include "hmsim/monitor.h"
#include "hmsim/optimizer.h"
#include "hmsim/workloads.h"

namespace hmsim
{
struct RunConfig {
  std::string label = "run";
  // indexed by Tier
  std::array<DeviceTier, tier_count> tiers{tier_preset("dram-interleaved"), tier_preset("dcpmm-interleaved")};
  CacheConfig cache;
  std::uint64_t ram_bytes = 4 * GiB;
  double fast_ratio = 40.0 / 4096.0;
  PolicyConfig policy;
  HeatConfig heat;
  WorkloadSpec workload;
  // Open loop: epochs to run. Closed loop: upper bound on epochs.
  std::uint64_t epochs = 1;
  bool closed_loop = false;

  const DeviceTier& tier(Tier t) const noexcept { return tiers[index_of(t)]; }
  double interval_ns() const noexcept { return policy.interval_s * 1e9; }
  void validate() const;
};

// Device traffic of one tier during one epoch. Byte counts include page copy
// traffic, which is also reported on its own as migration_bytes.
struct TierStats {
  std::uint64_t read_bytes = 0;
  std::uint64_t writeback_bytes = 0;
  std::uint64_t read_misses = 0;
  std::uint64_t writebacks = 0;
  std::uint64_t migration_bytes = 0;

  std::uint64_t traffic_bytes() const noexcept { return read_bytes + writeback_bytes; }

  friend bool operator==(const TierStats&, const TierStats&) = default;
};

struct EpochStats {
  std::uint64_t epoch_index = 0;
  double simulated_time_ns = 0;
  double cumulative_time_ns = 0;
  std::uint64_t events = 0;
  std::uint64_t relocations = 0;
  // Pages copied into the fast tier by the dram_cache policy.
  std::uint64_t cache_fills = 0;
  std::array<TierStats, tier_count> tiers{};

  const TierStats& tier(Tier t) const noexcept { return tiers[index_of(t)]; }
  // Slow-tier bytes over all device bytes; 0 for an epoch without traffic.
  double slow_share() const noexcept;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct RunSummary {
  std::string label;
  double total_time_ns = 0;
  std::uint64_t epochs = 0;
  std::uint64_t events = 0;
  std::uint64_t relocations = 0;
  std::uint64_t mapping_digest = 0;
  PolicyKind policy = PolicyKind::raminate;
  double fast_ratio = 0;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct RunResult {
  std::vector<EpochStats> epochs;
  RunSummary summary;
  PageMapping mapping{1, 0, 0, 1};
};

// Everything the engine saw in one epoch, for tests and debug dumps.
struct EpochView {
  const EpochStats& stats;
  // LLC read misses and write-backs, attributed with the mapping in force
  std::span<const MissRecord> misses;
  // Records charged to the devices, including copy traffic.
  std::span<const MissRecord> charged;
  const SwapPlan& plan;
  // Mapping after this epoch's swaps.
  const PageMapping& mapping;
  const PageHeat& heat;
};
using EpochObserver = std::function<void(const EpochView&)>;

class SimulationError : public Error
{
public:
  SimulationError(const std::string& what, std::uint64_t epoch_index, RunResult partial);

  std::uint64_t epoch_index() const noexcept { return epoch_index_; }
  const RunResult& partial() const noexcept { return partial_; }

private:
  std::uint64_t epoch_index_;
  RunResult partial_;
};

/**
 * Runs the configured workload to completion. Errors from any module are
 * rethrown as SimulationError carrying the failing epoch and the stats of the
 * epochs already finished.
 */
RunResult run(const RunConfig& config, const EpochObserver& observer = {});

// Same, with events from `make` instead of the configured workload. The
// static oracle calls it twice: once for its offline pass, once for the run.
using SourceFactory = std::function<std::unique_ptr<TraceSource>()>;
RunResult run(const RunConfig& config, const SourceFactory& make, const EpochObserver& observer = {});

// The mapping a run starts from (before any static-oracle placement).
PageMapping initial_mapping(const RunConfig& config);

// Whole-run LLC miss heat of a workload, weighted as the monitor weighs it.
std::vector<double> offline_heat(const RunConfig& config, TraceSource& source);

} // namespace hmsim

#endif
