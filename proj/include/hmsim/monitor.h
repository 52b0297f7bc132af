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

#ifndef HMSIM_MONITOR_H
#define HMSIM_MONITOR_H

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hmsim/mapping.h"
#include "hmsim/memmodel.h"

namespace hmsim
{
struct HeatConfig {
  double write_weight = 2.0;
  double decay_alpha = 0.5;
  // Accessed-bit emulation: count sub-interval scans that saw the page.
  bool sampled = false;
  unsigned scan_count = 5;

  void validate() const;
};

/**
 * Per-page access intensity measured on post-LLC traffic.
 *
 * `count` accumulates during an epoch; end_epoch() folds it into the decayed
 * score as score = alpha * score + count and clears the count.
 */
class PageHeat
{
public:
  PageHeat(std::uint64_t page_count, HeatConfig config = {});

  void record(std::span<const MissRecord> records);
  void sampled_record(std::span<const MissRecord> records);
  void end_epoch();

  double count(PageIndex p) const { return counts_.at(p); }
  double score(PageIndex p) const { return scores_.at(p); }
  std::span<const double> counts() const noexcept { return counts_; }
  std::span<const double> scores() const noexcept { return scores_; }
  std::uint64_t page_count() const noexcept { return scores_.size(); }
  const HeatConfig& config() const noexcept { return config_; }

private:
  void check(PageIndex p) const;

  HeatConfig config_;
  std::vector<double> counts_;
  std::vector<double> scores_;
  std::vector<std::uint64_t> scan_mark_;
  std::uint64_t scan_generation_ = 0;
};

struct ScoredPage {
  PageIndex page = 0;
  double score = 0;

  friend bool operator==(const ScoredPage&, const ScoredPage&) = default;
};

struct Rankings {
  // Slow-tier pages, hottest first.
  std::vector<ScoredPage> hot_slow;
  // Fast-tier pages, coldest first.
  std::vector<ScoredPage> cold_fast;
};

inline constexpr std::size_t unlimited = std::numeric_limits<std::size_t>::max();

// Ties go to the lower page index. With a limit, each list is the exact
// prefix of the full ordering.
Rankings rank(const PageHeat& heat, const PageMapping& mapping, std::size_t limit = unlimited);

} // namespace hmsim

#endif
