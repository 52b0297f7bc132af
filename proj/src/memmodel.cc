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

#include "hmsim/memmodel.h"

#include <algorithm>
#include <fmt/core.h>

namespace hmsim
{
double DeviceTier::writeback_penalty_ns() const noexcept { return std::max(0.0, writeback_latency_ns - read_latency_ns); }

void DeviceTier::validate() const
{
  if (!(read_latency_ns > 0) || !(writeback_latency_ns > 0))
    throw SpecError(fmt::format("tier '{}': latencies must be positive", name));
  if (!(read_bandwidth_per_channel > 0) || !(writeback_bandwidth_per_channel > 0))
    throw SpecError(fmt::format("tier '{}': bandwidths must be positive", name));
  if (channels < 1)
    throw SpecError(fmt::format("tier '{}': channels must be at least 1", name));
  if (capacity_bytes < page_size || capacity_bytes % page_size != 0)
    throw SpecError(fmt::format("tier '{}': capacity must be a positive multiple of {} bytes", name, page_size));
}

namespace
{
// Six DIMMs per socket, interleaved; per-channel figures are the measured
// peak divided by the interleave width.
DeviceTier dram_interleaved()
{
  return {"dram", 93.5, 96.1, 101.3 * GBps / 6, 37.4 * GBps / 6, 6, 96 * GiB};
}

DeviceTier dcpmm_interleaved()
{
  return {"dcpmm", 374.1, 391.2, 37.6 * GBps / 6, 2.9 * GBps / 6, 6, 768 * GiB};
}

// A single module accessed without interleaving.
DeviceTier dcpmm_noninterleaved()
{
  return {"dcpmm", 394.5, 458.4, 6.4 * GBps, 0.46 * GBps, 1, 128 * GiB};
}
} // namespace

DeviceTier tier_preset(std::string_view name)
{
  if (name == "dram-interleaved")
    return dram_interleaved();
  if (name == "dcpmm-interleaved")
    return dcpmm_interleaved();
  if (name == "dcpmm-noninterleaved")
    return dcpmm_noninterleaved();
  throw SpecError(fmt::format("unknown tier preset '{}'", name));
}

std::vector<std::string> tier_preset_names() { return {"dram-interleaved", "dcpmm-interleaved", "dcpmm-noninterleaved"}; }

std::uint64_t CacheConfig::ways() const noexcept { return associativity == fully_associative ? lines() : associativity; }

std::uint64_t CacheConfig::sets() const noexcept
{
  auto w = ways();
  return w == 0 ? 0 : lines() / w;
}

void CacheConfig::validate() const
{
  if (line_size != cacheline_size)
    throw SpecError(fmt::format("cacheline size must be {} bytes", cacheline_size));
  if (llc_capacity == 0 || llc_capacity % line_size != 0)
    throw SpecError("llc capacity must be a positive multiple of the cacheline size");
  if (associativity != fully_associative && lines() % associativity != 0)
    throw SpecError(fmt::format("llc of {} lines cannot be split into {}-way sets", lines(), associativity));
  if (associativity == fully_associative && lines() >= UINT32_MAX)
    throw SpecError("fully-associative llc is too large");
  if (!(mlp >= 1.0))
    throw SpecError("mlp must be at least 1");
}

std::string_view to_string(MissKind k) noexcept
{
  switch (k) {
  case MissKind::read_miss:
    return "read_miss";
  case MissKind::writeback:
    return "writeback";
  case MissKind::migration_read:
    return "migration_read";
  case MissKind::migration_write:
    return "migration_write";
  }
  return "?";
}

void append_record(std::vector<MissRecord>& out, const MissRecord& rec)
{
  if (!out.empty()) {
    auto& last = out.back();
    if (last.page == rec.page && last.tier == rec.tier && last.kind == rec.kind) {
      last.count += rec.count;
      return;
    }
  }
  out.push_back(rec);
}

LastLevelCache::LastLevelCache(const CacheConfig& config, std::uint64_t address_limit)
    : config_(config), address_limit_(address_limit), sets_(0), ways_(0)
{
  config_.validate();
  ways_ = config_.ways();
  sets_ = config_.sets();
  if (config_.associativity == CacheConfig::fully_associative) {
    slots_.resize(ways_);
    where_.reserve(ways_);
  } else {
    tags_.assign(sets_ * ways_, 0);
    stamps_.assign(sets_ * ways_, 0);
    dirty_.assign(sets_ * ways_, 0);
  }
}

LastLevelCache::Outcome LastLevelCache::access(const AccessEvent& ev)
{
  if (ev.address >= address_limit_)
    throw AddressRangeError(fmt::format("address {:#x} outside guest memory of {} bytes", ev.address, address_limit_));
  const auto line = ev.address / config_.line_size;
  const bool write = ev.op == AccessOp::write;
  if (config_.associativity == CacheConfig::fully_associative)
    return access_fully_associative(line, write);
  return access_set_associative(line, write);
}

LastLevelCache::Outcome LastLevelCache::access_set_associative(std::uint64_t line, bool write)
{
  const auto base = (line % sets_) * ways_;
  const auto tag = line + 1;
  ++clock_;

  std::uint64_t victim = base;
  for (std::uint64_t w = base; w < base + ways_; ++w) {
    if (tags_[w] == tag) {
      stamps_[w] = clock_;
      dirty_[w] |= static_cast<std::uint8_t>(write);
      return {};
    }
    if (stamps_[w] < stamps_[victim])
      victim = w;
  }

  Outcome out{true, false, 0};
  if (tags_[victim] != 0 && dirty_[victim]) {
    out.writeback = true;
    out.victim_line = tags_[victim] - 1;
  }
  tags_[victim] = tag;
  stamps_[victim] = clock_;
  dirty_[victim] = static_cast<std::uint8_t>(write);
  return out;
}

void LastLevelCache::unlink(std::uint32_t s)
{
  auto& slot = slots_[s];
  if (slot.prev != nil)
    slots_[slot.prev].next = slot.next;
  else
    head_ = slot.next;
  if (slot.next != nil)
    slots_[slot.next].prev = slot.prev;
  else
    tail_ = slot.prev;
}

void LastLevelCache::push_front(std::uint32_t s)
{
  slots_[s].prev = nil;
  slots_[s].next = head_;
  if (head_ != nil)
    slots_[head_].prev = s;
  head_ = s;
  if (tail_ == nil)
    tail_ = s;
}

LastLevelCache::Outcome LastLevelCache::access_fully_associative(std::uint64_t line, bool write)
{
  if (auto it = where_.find(line); it != where_.end()) {
    const auto s = it->second;
    slots_[s].dirty |= write;
    if (head_ != s) {
      unlink(s);
      push_front(s);
    }
    return {};
  }

  Outcome out{true, false, 0};
  std::uint32_t s;
  if (where_.size() < slots_.size()) {
    s = static_cast<std::uint32_t>(where_.size());
  } else {
    s = tail_;
    unlink(s);
    where_.erase(slots_[s].line);
    if (slots_[s].dirty) {
      out.writeback = true;
      out.victim_line = slots_[s].line;
    }
  }
  slots_[s].line = line;
  slots_[s].dirty = write;
  where_.emplace(line, s);
  push_front(s);
  return out;
}

std::uint64_t LastLevelCache::resident_lines() const noexcept
{
  if (config_.associativity == CacheConfig::fully_associative)
    return where_.size();
  return static_cast<std::uint64_t>(std::count_if(tags_.begin(), tags_.end(), [](auto t) { return t != 0; }));
}

std::uint64_t LastLevelCache::dirty_lines() const noexcept
{
  if (config_.associativity == CacheConfig::fully_associative) {
    std::uint64_t n = 0;
    for (const auto& [line, s] : where_)
      n += slots_[s].dirty;
    return n;
  }
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < tags_.size(); ++i)
    n += tags_[i] != 0 && dirty_[i];
  return n;
}

std::vector<MissRecord> llc_filter(std::span<const AccessEvent> trace, const CacheConfig& cache,
                                   std::uint64_t address_limit, const TierResolver& tier_of)
{
  LastLevelCache llc(cache, address_limit);
  auto resolve = [&](PageIndex p) { return tier_of ? tier_of(p) : Tier::slow; };

  std::vector<MissRecord> out;
  for (const auto& ev : trace) {
    auto r = llc.access(ev);
    if (!r.miss)
      continue;
    const auto page = page_of(ev.address);
    append_record(out, {page, resolve(page), MissKind::read_miss, 1});
    if (r.writeback) {
      const auto victim_page = r.victim_line * cache.line_size / page_size;
      append_record(out, {victim_page, resolve(victim_page), MissKind::writeback, 1});
    }
  }
  return out;
}

void TierDemand::add(const MissRecord& rec) noexcept
{
  switch (rec.kind) {
  case MissKind::read_miss:
    read_misses += rec.count;
    break;
  case MissKind::writeback:
    writebacks += rec.count;
    break;
  case MissKind::migration_read:
    migration_read_bytes += rec.count * cacheline_size;
    break;
  case MissKind::migration_write:
    migration_write_bytes += rec.count * cacheline_size;
    break;
  }
}

DemandByTier aggregate(std::span<const MissRecord> records)
{
  DemandByTier d{};
  for (const auto& r : records)
    d[index_of(r.tier)].add(r);
  return d;
}

double tier_busy_ns(const TierDemand& demand, const DeviceTier& tier, double overlap)
{
  const double latency_work = static_cast<double>(demand.read_misses) * tier.read_latency_ns
                              + static_cast<double>(demand.writebacks) * tier.writeback_penalty_ns();
  const double read_ns = static_cast<double>(demand.read_bytes()) / tier.read_bandwidth() * 1e9;
  const double write_ns = static_cast<double>(demand.writeback_bytes()) / tier.writeback_bandwidth() * 1e9;
  return std::max({latency_work / overlap, read_ns, write_ns});
}

double epoch_time(std::span<const TierDemand> demand, std::span<const DeviceTier> tiers, const CacheConfig& cache,
                  double compute_ns, unsigned concurrency)
{
  if (demand.size() != tiers.size())
    throw SpecError("demand and tier lists differ in length");
  const double overlap = cache.mlp * std::max(1u, concurrency);
  double busiest = 0;
  for (std::size_t i = 0; i < tiers.size(); ++i)
    busiest = std::max(busiest, tier_busy_ns(demand[i], tiers[i], overlap));
  return busiest + compute_ns;
}

} // namespace hmsim
