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

#include "hmsim/mapping.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/core.h>
#include <fmt/ostream.h>

namespace hmsim
{
PageMapping::PageMapping(std::uint64_t page_count, std::uint64_t fast_pages, std::uint64_t fast_capacity_pages,
                         std::uint64_t slow_capacity_pages)
    : capacity_{fast_capacity_pages, slow_capacity_pages}
{
  if (fast_pages > page_count)
    throw SpecError("more fast pages than guest pages");
  const auto slow_pages = page_count - fast_pages;
  if (fast_pages > fast_capacity_pages)
    throw CapacityError(fmt::format("fast tier holds {} pages, {} requested", fast_capacity_pages, fast_pages));
  if (slow_pages > slow_capacity_pages)
    throw CapacityError(fmt::format("slow tier holds {} pages, {} requested", slow_capacity_pages, slow_pages));

  entries_.resize(page_count);
  for (PageIndex p = 0; p < slow_pages; ++p)
    entries_[p] = {Tier::slow, p};
  for (PageIndex p = slow_pages; p < page_count; ++p)
    entries_[p] = {Tier::fast, p - slow_pages};
  mapped_ = {fast_pages, slow_pages};
}

PageMapping PageMapping::from_entries(std::vector<Frame> entries, std::uint64_t fast_capacity_pages,
                                      std::uint64_t slow_capacity_pages)
{
  PageMapping m(0, 0, fast_capacity_pages, slow_capacity_pages);
  m.entries_ = std::move(entries);
  for (const auto& f : m.entries_)
    ++m.mapped_[index_of(f.tier)];
  for (auto t : all_tiers)
    if (m.mapped_[index_of(t)] > m.capacity_[index_of(t)])
      throw CapacityError(fmt::format("{} tier over capacity", to_string(t)));
  if (!m.is_bijection())
    throw PlanError("mapping table maps two pages to the same frame");
  return m;
}

Frame PageMapping::resolve(PageIndex page) const
{
  if (page >= entries_.size())
    throw AddressRangeError(fmt::format("guest page {} out of range ({} pages)", page, entries_.size()));
  return entries_[page];
}

void PageMapping::validate_plan(std::span<const PagePair> pairs) const
{
  std::vector<PageIndex> seen;
  seen.reserve(pairs.size() * 2);
  for (const auto& [a, b] : pairs) {
    if (a >= entries_.size() || b >= entries_.size())
      throw PlanError(fmt::format("pair ({}, {}) references a page outside guest RAM", a, b));
    if (entries_[a].tier == entries_[b].tier)
      throw PlanError(fmt::format("pair ({}, {}) does not cross tiers", a, b));
    seen.push_back(a);
    seen.push_back(b);
  }
  std::sort(seen.begin(), seen.end());
  if (auto dup = std::adjacent_find(seen.begin(), seen.end()); dup != seen.end())
    throw PlanError(fmt::format("page {} appears twice in the plan", *dup));
}

void PageMapping::apply_swaps(std::span<const PagePair> pairs)
{
  for (const auto& [a, b] : pairs)
    std::swap(entries_[a], entries_[b]);
  for (auto& m : migration_) {
    m.read += pairs.size() * page_size;
    m.write += pairs.size() * page_size;
  }
}

bool PageMapping::is_bijection() const
{
  std::array<std::vector<bool>, tier_count> owned;
  for (auto t : all_tiers)
    owned[index_of(t)].assign(capacity_[index_of(t)], false);
  std::array<std::uint64_t, tier_count> counts{};
  for (const auto& f : entries_) {
    auto& slots = owned[index_of(f.tier)];
    if (f.index >= slots.size() || slots[f.index])
      return false;
    slots[f.index] = true;
    ++counts[index_of(f.tier)];
  }
  return counts == mapped_;
}

std::uint64_t PageMapping::digest() const noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& f : entries_) {
    mix(static_cast<std::uint64_t>(f.tier));
    mix(f.index);
  }
  return h;
}

PageMapping create_mapping(std::uint64_t ram_bytes, double fast_ratio, const DeviceTier& fast, const DeviceTier& slow)
{
  if (!(fast_ratio >= 0.0 && fast_ratio <= 1.0))
    throw SpecError(fmt::format("fast_ratio {} outside [0, 1]", fast_ratio));
  if (ram_bytes == 0 || ram_bytes % page_size != 0)
    throw SpecError(fmt::format("guest RAM of {} bytes is not a positive multiple of the page size", ram_bytes));
  const auto pages = ram_bytes / page_size;
  const auto fast_pages = static_cast<std::uint64_t>(std::llround(fast_ratio * static_cast<double>(pages)));
  return PageMapping(pages, fast_pages, fast.capacity_pages(), slow.capacity_pages());
}

std::vector<MissRecord> swap_pages(PageMapping& mapping, std::span<const PagePair> pairs)
{
  mapping.validate_plan(pairs);
  mapping.apply_swaps(pairs);

  std::vector<MissRecord> records;
  if (pairs.empty())
    return records;
  // Attributed to the first page of the plan; migration records carry no heat.
  const auto lines = pairs.size() * lines_per_page;
  for (auto t : all_tiers) {
    records.push_back({pairs.front().first, t, MissKind::migration_read, lines});
    records.push_back({pairs.front().first, t, MissKind::migration_write, lines});
  }
  return records;
}

Frame resolve(const PageMapping& mapping, PageIndex page) { return mapping.resolve(page); }

void dump_mapping(const PageMapping& mapping, std::ostream& out)
{
  out << "guest_page,tier,frame\n";
  const auto entries = mapping.entries();
  for (std::size_t p = 0; p < entries.size(); ++p)
    fmt::print(out, "{},{},{}\n", p, to_string(entries[p].tier), entries[p].index);
}

PageMapping restore_mapping(std::istream& in, std::uint64_t fast_capacity_pages, std::uint64_t slow_capacity_pages)
{
  std::string line;
  if (!std::getline(in, line) || line != "guest_page,tier,frame")
    throw TraceFormatError("mapping table: missing 'guest_page,tier,frame' header");

  std::vector<Frame> entries;
  std::uint64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    std::istringstream row(line);
    std::string page_s, tier_s, frame_s;
    if (!std::getline(row, page_s, ',') || !std::getline(row, tier_s, ',') || !std::getline(row, frame_s))
      throw TraceFormatError(fmt::format("mapping table line {}: expected three fields", lineno));
    try {
      const auto page = std::stoull(page_s);
      if (page != entries.size())
        throw TraceFormatError(fmt::format("mapping table line {}: expected page {}, got {}", lineno, entries.size(), page));
      entries.push_back({parse_tier(tier_s), std::stoull(frame_s)});
    } catch (const std::logic_error&) {
      throw TraceFormatError(fmt::format("mapping table line {}: malformed number", lineno));
    } catch (const SpecError& e) {
      throw TraceFormatError(fmt::format("mapping table line {}: {}", lineno, e.what()));
    }
  }
  return PageMapping::from_entries(std::move(entries), fast_capacity_pages, slow_capacity_pages);
}

} // namespace hmsim
