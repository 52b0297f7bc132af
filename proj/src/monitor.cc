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

#include "hmsim/monitor.h"

#include <algorithm>
#include <fmt/core.h>

namespace hmsim
{
namespace
{
bool carries_heat(MissKind k) noexcept { return k == MissKind::read_miss || k == MissKind::writeback; }
} // namespace

void HeatConfig::validate() const
{
  if (!(write_weight >= 0))
    throw SpecError("write_weight must be nonnegative");
  if (!(decay_alpha >= 0 && decay_alpha < 1))
    throw SpecError("decay_alpha must lie in [0, 1)");
  if (scan_count < 1)
    throw SpecError("scan_count must be at least 1");
}

PageHeat::PageHeat(std::uint64_t page_count, HeatConfig config)
    : config_(config), counts_(page_count, 0.0), scores_(page_count, 0.0)
{
  config_.validate();
  if (config_.sampled)
    scan_mark_.assign(page_count, 0);
}

void PageHeat::check(PageIndex p) const
{
  if (p >= counts_.size())
    throw AddressRangeError(fmt::format("heat record for page {} outside {} pages", p, counts_.size()));
}

void PageHeat::record(std::span<const MissRecord> records)
{
  for (const auto& r : records) {
    if (!carries_heat(r.kind))
      continue;
    check(r.page);
    const double w = r.kind == MissKind::writeback ? config_.write_weight : 1.0;
    counts_[r.page] += w * static_cast<double>(r.count);
  }
}

void PageHeat::sampled_record(std::span<const MissRecord> records)
{
  if (scan_mark_.size() != counts_.size())
    scan_mark_.assign(counts_.size(), 0);

  std::uint64_t total = 0;
  for (const auto& r : records)
    if (carries_heat(r.kind))
      total += r.count;
  if (total == 0)
    return;

  // Split the epoch into scan_count equal slices of the miss stream; a page
  // scores one point for every slice in which it was touched.
  const std::uint64_t scans = config_.scan_count;
  std::uint64_t pos = 0;
  for (const auto& r : records) {
    if (!carries_heat(r.kind) || r.count == 0)
      continue;
    check(r.page);
    const auto first = pos * scans / total;
    const auto last = (pos + r.count - 1) * scans / total;
    for (auto s = first; s <= last; ++s) {
      const auto gen = scan_generation_ + s + 1;
      if (scan_mark_[r.page] < gen) {
        scan_mark_[r.page] = gen;
        counts_[r.page] += 1.0;
      }
    }
    pos += r.count;
  }
  scan_generation_ += scans;
}

void PageHeat::end_epoch()
{
  for (std::size_t p = 0; p < scores_.size(); ++p) {
    scores_[p] = config_.decay_alpha * scores_[p] + counts_[p];
    counts_[p] = 0.0;
  }
}

namespace
{
bool hotter(const ScoredPage& a, const ScoredPage& b) noexcept
{
  return a.score > b.score || (a.score == b.score && a.page < b.page);
}

bool colder(const ScoredPage& a, const ScoredPage& b) noexcept
{
  return a.score < b.score || (a.score == b.score && a.page < b.page);
}

template <typename Less>
void sort_prefix(std::vector<ScoredPage>& v, std::size_t limit, Less less)
{
  if (limit < v.size()) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(limit), v.end(), less);
    v.resize(limit);
  }
  std::sort(v.begin(), v.end(), less);
}
} // namespace

Rankings rank(const PageHeat& heat, const PageMapping& mapping, std::size_t limit)
{
  if (heat.page_count() != mapping.page_count())
    throw SpecError("heat and mapping cover different page ranges");

  const auto scores = heat.scores();
  const auto entries = mapping.entries();
  Rankings out;

  // Positive-score slow pages lead hot_slow; zero-score pages follow in index
  // order, so they are only materialised as far as the limit requires.
  for (PageIndex p = 0; p < entries.size(); ++p)
    if (entries[p].tier == Tier::slow && scores[p] > 0)
      out.hot_slow.push_back({p, scores[p]});
  sort_prefix(out.hot_slow, limit, hotter);
  for (PageIndex p = 0; p < entries.size() && out.hot_slow.size() < limit; ++p)
    if (entries[p].tier == Tier::slow && !(scores[p] > 0))
      out.hot_slow.push_back({p, scores[p]});

  out.cold_fast.reserve(std::min<std::uint64_t>(mapping.pages_on(Tier::fast), limit));
  for (PageIndex p = 0; p < entries.size(); ++p)
    if (entries[p].tier == Tier::fast)
      out.cold_fast.push_back({p, scores[p]});
  sort_prefix(out.cold_fast, limit, colder);
  return out;
}

} // namespace hmsim
