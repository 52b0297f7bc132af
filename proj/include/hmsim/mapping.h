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

#ifndef HMSIM_MAPPING_H
#define HMSIM_MAPPING_H

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hmsim/common.h"
#include "hmsim/memmodel.h"

namespace hmsim
{
struct Frame {
  Tier tier = Tier::slow;
  std::uint64_t index = 0;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct PagePair {
  PageIndex first = 0;
  PageIndex second = 0;

  friend bool operator==(const PagePair&, const PagePair&) = default;
};

struct MigrationBytes {
  std::uint64_t read = 0;
  std::uint64_t write = 0;
};

/**
 * Guest-physical page -> (tier, frame) table backing one VM's RAM.
 *
 * The slow region is mapped from guest page 0 upward and the fast region sits
 * at the top of guest RAM. Every guest page owns exactly one frame and no frame
 * is shared; swaps exchange frames between a fast page and a slow page, so the
 * number of pages on each tier never changes.
 */
class PageMapping
{
public:
  PageMapping(std::uint64_t page_count, std::uint64_t fast_pages, std::uint64_t fast_capacity_pages,
              std::uint64_t slow_capacity_pages);

  // Rebuilds a mapping from an explicit table; throws CapacityError or
  // PlanError if the table is not a valid bijection within capacity.
  static PageMapping from_entries(std::vector<Frame> entries, std::uint64_t fast_capacity_pages,
                                  std::uint64_t slow_capacity_pages);

  std::uint64_t page_count() const noexcept { return entries_.size(); }
  std::uint64_t ram_bytes() const noexcept { return page_count() * page_size; }
  std::uint64_t pages_on(Tier t) const noexcept { return mapped_[index_of(t)]; }
  std::uint64_t capacity_pages(Tier t) const noexcept { return capacity_[index_of(t)]; }

  Frame resolve(PageIndex page) const;
  // Unchecked lookup for the simulation hot path.
  Tier tier_of(PageIndex page) const noexcept { return entries_[page].tier; }

  const MigrationBytes& migration_bytes(Tier t) const noexcept { return migration_[index_of(t)]; }

  // Throws PlanError unless every pair crosses tiers and no page repeats.
  void validate_plan(std::span<const PagePair> pairs) const;

  // Applies a validated plan and charges migration traffic.
  void apply_swaps(std::span<const PagePair> pairs);

  // Full scan: every frame is owned by exactly one page and counts match.
  bool is_bijection() const;

  // FNV-1a over the (tier, frame) table.
  std::uint64_t digest() const noexcept;

  std::span<const Frame> entries() const noexcept { return entries_; }

  friend bool operator==(const PageMapping& a, const PageMapping& b) noexcept { return a.entries_ == b.entries_; }

private:
  std::vector<Frame> entries_;
  std::array<std::uint64_t, tier_count> capacity_{};
  std::array<std::uint64_t, tier_count> mapped_{};
  std::array<MigrationBytes, tier_count> migration_{};
};

// Builds a mapping with round(fast_ratio * pages) pages on the fast tier.
PageMapping create_mapping(std::uint64_t ram_bytes, double fast_ratio, const DeviceTier& fast, const DeviceTier& slow);

/**
 * Exchanges the frames of each pair. Every swapped pair costs one page read
 * and one page write on each of the two tiers; those bytes are returned as
 * migration records so they land in the current epoch's demand. The whole plan
 * is rejected if any pair is invalid.
 */
std::vector<MissRecord> swap_pages(PageMapping& mapping, std::span<const PagePair> pairs);

Frame resolve(const PageMapping& mapping, PageIndex page);

// Text table "guest_page,tier,frame", one row per page, with a header row.
void dump_mapping(const PageMapping& mapping, std::ostream& out);
PageMapping restore_mapping(std::istream& in, std::uint64_t fast_capacity_pages, std::uint64_t slow_capacity_pages);

} // namespace hmsim

#endif
