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

#include <doctest.h>

#include <algorithm>
#include <list>
#include <random>
#include <vector>

#include "hmsim/config.h"
#include "hmsim/memmodel.h"

using namespace hmsim;

namespace
{
// Textbook LRU stack per set: front is most recently used.
class ReferenceLru
{
public:
  ReferenceLru(std::uint64_t sets, std::uint64_t ways) : sets_(sets), ways_(ways), stacks_(sets) {}

  LastLevelCache::Outcome access(std::uint64_t address, bool write)
  {
    const auto line = address / 64;
    auto& stack = stacks_[line % sets_];
    for (auto it = stack.begin(); it != stack.end(); ++it) {
      if (it->first == line) {
        auto entry = *it;
        entry.second = entry.second || write;
        stack.erase(it);
        stack.push_front(entry);
        return {};
      }
    }
    LastLevelCache::Outcome out{true, false, 0};
    if (stack.size() == ways_) {
      const auto victim = stack.back();
      stack.pop_back();
      if (victim.second) {
        out.writeback = true;
        out.victim_line = victim.first;
      }
    }
    stack.push_front({line, write});
    return out;
  }

private:
  std::uint64_t sets_, ways_;
  std::vector<std::list<std::pair<std::uint64_t, bool>>> stacks_;
};

std::vector<AccessEvent> random_trace(std::size_t n, std::uint64_t limit, std::uint64_t seed, double write_p = 0.3)
{
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> addr(0, limit - 1);
  std::bernoulli_distribution w(write_p);
  std::vector<AccessEvent> t;
  for (std::size_t i = 0; i < n; ++i)
    t.push_back({w(rng) ? AccessOp::write : AccessOp::read, addr(rng), 0});
  return t;
}

// Busy time written out from the cost model's definition.
double reference_busy(double reads, double wbs, double mig_r, double mig_w, const DeviceTier& t, double overlap)
{
  const double lat = reads * t.read_latency_ns + wbs * (t.writeback_latency_ns - t.read_latency_ns);
  const double rb = (reads * 64 + mig_r) / (t.read_bandwidth_per_channel * t.channels) * 1e9;
  const double wb = (wbs * 64 + mig_w) / (t.writeback_bandwidth_per_channel * t.channels) * 1e9;
  return std::max({lat / overlap, rb, wb});
}
} // namespace

TEST_CASE("tier presets carry the measured device figures")
{
  const auto dram = tier_preset("dram-interleaved");
  CHECK(dram.read_latency_ns == 93.5);
  CHECK(dram.writeback_latency_ns == 96.1);
  CHECK(dram.read_bandwidth() == doctest::Approx(101.3e9).epsilon(1e-12));
  CHECK(dram.writeback_bandwidth() == doctest::Approx(37.4e9).epsilon(1e-12));
  CHECK(dram.channels == 6);

  const auto nvm = tier_preset("dcpmm-interleaved");
  CHECK(nvm.read_latency_ns == 374.1);
  CHECK(nvm.writeback_latency_ns == 391.2);
  CHECK(nvm.read_bandwidth() == doctest::Approx(37.6e9).epsilon(1e-12));
  CHECK(nvm.writeback_bandwidth() == doctest::Approx(2.9e9).epsilon(1e-12));

  const auto single = tier_preset("dcpmm-noninterleaved");
  CHECK(single.read_latency_ns == 394.5);
  CHECK(single.writeback_latency_ns == 458.4);
  CHECK(single.channels == 1);
  CHECK(single.read_bandwidth() == doctest::Approx(6.4e9));
  CHECK(single.writeback_bandwidth() == doctest::Approx(0.46e9));

  CHECK_THROWS_AS(tier_preset("hbm"), SpecError);
  CHECK(tier_preset_names().size() == 3);
}

TEST_CASE("shipped tier files match the built-in presets")
{
  for (const auto& name : tier_preset_names()) {
    CAPTURE(name);
    const auto file = load_tier_file(std::filesystem::path(HMSIM_SOURCE_DIR) / "configs" / "tiers" / (name + ".ini"));
    const auto preset = tier_preset(name);
    CHECK(file.name == preset.name);
    CHECK(file.read_latency_ns == preset.read_latency_ns);
    CHECK(file.writeback_latency_ns == preset.writeback_latency_ns);
    CHECK(file.read_bandwidth_per_channel == doctest::Approx(preset.read_bandwidth_per_channel).epsilon(1e-12));
    CHECK(file.writeback_bandwidth_per_channel
          == doctest::Approx(preset.writeback_bandwidth_per_channel).epsilon(1e-12));
    CHECK(file.channels == preset.channels);
    CHECK(file.capacity_bytes == preset.capacity_bytes);
  }
}

TEST_CASE("tier validation")
{
  auto t = tier_preset("dram-interleaved");
  CHECK_NOTHROW(t.validate());
  auto bad = t;
  bad.read_latency_ns = 0;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = t;
  bad.writeback_latency_ns = -1;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = t;
  bad.channels = 0;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = t;
  bad.capacity_bytes = 100;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  CHECK(t.writeback_penalty_ns() == doctest::Approx(2.6));
}

TEST_CASE("cache geometry")
{
  CacheConfig c;
  c.llc_capacity = 36 * MiB;
  CHECK(c.lines() == 589824);
  CHECK(c.ways() == 16);
  CHECK(c.sets() == 36864);
  c.associativity = CacheConfig::fully_associative;
  CHECK(c.ways() == c.lines());
  CHECK(c.sets() == 1);
  c.associativity = 7;
  CHECK_THROWS_AS(c.validate(), SpecError);
  c.associativity = 16;
  c.mlp = 0.5;
  CHECK_THROWS_AS(c.validate(), SpecError);
}

TEST_CASE("LLC matches a reference LRU stack on random traces")
{
  struct Shape {
    std::uint64_t capacity;
    unsigned assoc;
  };
  for (const auto shape : {Shape{4 * KiB, 1}, Shape{4 * KiB, 4}, Shape{8 * KiB, 16}, Shape{2 * KiB, 0},
                           Shape{16 * KiB, 0}, Shape{64 * KiB, 8}}) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      CAPTURE(shape.capacity);
      CAPTURE(shape.assoc);
      CAPTURE(seed);
      CacheConfig c;
      c.llc_capacity = shape.capacity;
      c.associativity = shape.assoc;
      const std::uint64_t limit = shape.capacity * (1 + seed % 4);
      LastLevelCache llc(c, limit);
      ReferenceLru ref(c.sets(), c.ways());
      for (const auto& ev : random_trace(20000, limit, seed)) {
        const auto got = llc.access(ev);
        const auto want = ref.access(ev.address, ev.op == AccessOp::write);
        REQUIRE(got.miss == want.miss);
        REQUIRE(got.writeback == want.writeback);
        if (want.writeback)
          REQUIRE(got.victim_line == want.victim_line);
      }
    }
  }
}

TEST_CASE("1 MiB fully-associative LLC: footprint twice the capacity misses on every access")
{
  CacheConfig c;
  c.llc_capacity = 1 * MiB;
  c.associativity = CacheConfig::fully_associative;
  std::vector<AccessEvent> trace;
  for (int pass = 0; pass < 3; ++pass)
    for (std::uint64_t a = 0; a < 2 * MiB; a += 64)
      trace.push_back({AccessOp::write, a, 0});

  LastLevelCache llc(c, 2 * MiB);
  ReferenceLru ref(1, c.lines());
  std::uint64_t misses = 0, wbs = 0, ref_misses = 0, ref_wbs = 0;
  for (const auto& ev : trace) {
    auto o = llc.access(ev);
    auto r = ref.access(ev.address, true);
    misses += o.miss;
    wbs += o.writeback;
    ref_misses += r.miss;
    ref_wbs += r.writeback;
  }
  CHECK(misses == ref_misses);
  CHECK(wbs == ref_wbs);
  CHECK(misses == trace.size());
  CHECK(wbs == trace.size() - c.lines());
  CHECK(llc.resident_lines() == c.lines());
  CHECK(llc.dirty_lines() == c.lines());
}

TEST_CASE("working set within capacity only takes cold misses")
{
  CacheConfig c;
  c.llc_capacity = 64 * KiB;
  const auto trace = random_trace(50000, 64 * KiB, 9);
  const auto recs = llc_filter(trace, c, 64 * KiB);
  const auto d = aggregate(recs);
  CHECK(d[index_of(Tier::slow)].read_misses == 1024);
  CHECK(d[index_of(Tier::slow)].writebacks == 0);
}

TEST_CASE("llc_filter emits the read miss before the write-back it causes")
{
  CacheConfig c;
  c.llc_capacity = 64;
  c.associativity = 1;
  std::vector<AccessEvent> t{{AccessOp::write, 0, 0}, {AccessOp::read, 8192, 0}};
  const auto recs = llc_filter(t, c, 16384, [](PageIndex p) { return p == 0 ? Tier::fast : Tier::slow; });
  REQUIRE(recs.size() == 3);
  CHECK(recs[0] == MissRecord{0, Tier::fast, MissKind::read_miss, 1});
  CHECK(recs[1] == MissRecord{2, Tier::slow, MissKind::read_miss, 1});
  CHECK(recs[2] == MissRecord{0, Tier::fast, MissKind::writeback, 1});
}

TEST_CASE("llc_filter merges consecutive records of the same page")
{
  CacheConfig c;
  c.llc_capacity = 4 * KiB;
  std::vector<AccessEvent> t;
  for (std::uint64_t a = 0; a < 4096; a += 64)
    t.push_back({AccessOp::read, a, 0});
  const auto recs = llc_filter(t, c, 4096);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].count == 64);
  CHECK(recs[0].tier == Tier::slow);
}

TEST_CASE("out-of-range address")
{
  CacheConfig c;
  c.llc_capacity = 4 * KiB;
  std::vector<AccessEvent> t{{AccessOp::read, 4096, 0}};
  CHECK_THROWS_AS(llc_filter(t, c, 4096), AddressRangeError);
}

TEST_CASE("llc_filter is deterministic")
{
  CacheConfig c;
  c.llc_capacity = 16 * KiB;
  const auto t = random_trace(30000, 256 * KiB, 4);
  CHECK(llc_filter(t, c, 256 * KiB) == llc_filter(t, c, 256 * KiB));
}

TEST_CASE("epoch time without misses is the compute time")
{
  std::array<TierDemand, 2> d{};
  std::array tiers{tier_preset("dram-interleaved"), tier_preset("dcpmm-interleaved")};
  CHECK(epoch_time(d, tiers, CacheConfig{}, 0.0) == 0.0);
  CHECK(epoch_time(d, tiers, CacheConfig{}, 1234.5) == 1234.5);
}

TEST_CASE("single misses cost one device latency")
{
  std::array tiers{tier_preset("dram-interleaved"), tier_preset("dcpmm-interleaved")};
  std::array<TierDemand, 2> d{};
  d[1].read_misses = 1;
  CHECK(epoch_time(d, tiers, CacheConfig{}, 0) == doctest::Approx(374.1));
  d[1].writebacks = 1;
  CHECK(epoch_time(d, tiers, CacheConfig{}, 0) == doctest::Approx(391.2));
  d = {};
  d[0].read_misses = 1;
  d[0].writebacks = 1;
  CHECK(epoch_time(d, tiers, CacheConfig{}, 10) == doctest::Approx(96.1 + 10));
}

TEST_CASE("epoch time agrees with the written-out cost model")
{
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> n(0, 2000000);
  std::uniform_real_distribution<double> mlp(1, 32);
  std::array tiers{tier_preset("dram-interleaved"), tier_preset("dcpmm-interleaved")};
  for (int i = 0; i < 2000; ++i) {
    std::array<TierDemand, 2> d{};
    for (auto& t : d) {
      t.read_misses = n(rng);
      t.writebacks = n(rng) / 3;
      t.migration_read_bytes = n(rng) * 8;
      t.migration_write_bytes = n(rng) * 8;
    }
    CacheConfig c;
    c.mlp = mlp(rng);
    const unsigned workers = 1 + i % 24;
    const double compute = static_cast<double>(n(rng));
    double want = 0;
    for (std::size_t k = 0; k < 2; ++k)
      want = std::max(want, reference_busy(static_cast<double>(d[k].read_misses), static_cast<double>(d[k].writebacks),
                                           static_cast<double>(d[k].migration_read_bytes),
                                           static_cast<double>(d[k].migration_write_bytes), tiers[k],
                                           c.mlp * workers));
    REQUIRE(epoch_time(d, tiers, c, compute, workers) == doctest::Approx(want + compute).epsilon(1e-12));
  }
}

TEST_CASE("per-tier throughput never exceeds the channel bandwidth")
{
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint64_t> n(1, 5000000);
  std::uniform_real_distribution<double> overlap(1, 1000);
  for (const auto& name : tier_preset_names()) {
    const auto tier = tier_preset(name);
    for (int i = 0; i < 1000; ++i) {
      TierDemand d;
      d.read_misses = n(rng);
      d.writebacks = n(rng) / (1 + i % 5);
      d.migration_read_bytes = (i % 3) * n(rng);
      const double busy = tier_busy_ns(d, tier, overlap(rng));
      REQUIRE(static_cast<double>(d.read_bytes()) / busy * 1e9 <= tier.read_bandwidth() * (1 + 1e-12));
      REQUIRE(static_cast<double>(d.writeback_bytes()) / busy * 1e9 <= tier.writeback_bandwidth() * (1 + 1e-12));
    }
  }
}

TEST_CASE("fewer channels never speed an epoch up; bandwidth-bound demand scales with the channel count")
{
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::uint64_t> n(0, 3000000);
  auto tier = tier_preset("dcpmm-interleaved");
  for (int i = 0; i < 1000; ++i) {
    TierDemand d;
    d.read_misses = n(rng);
    d.writebacks = n(rng) / 4;
    const double overlap = 1 + static_cast<double>(i % 400);
    auto narrow = tier;
    for (unsigned ch : {6u, 3u, 1u}) {
      auto prev = narrow;
      narrow.channels = ch;
      REQUIRE(tier_busy_ns(d, narrow, overlap) >= tier_busy_ns(d, prev, overlap));
    }
  }
  TierDemand scan;
  scan.read_misses = 1u << 24;
  auto one = tier;
  one.channels = 1;
  const double ratio = tier_busy_ns(scan, one, 384) / tier_busy_ns(scan, tier, 384);
  CHECK(ratio == doctest::Approx(6.0).epsilon(0.01));
}

TEST_CASE("aggregate sums records by tier and kind")
{
  std::vector<MissRecord> r{{1, Tier::fast, MissKind::read_miss, 3},
                            {2, Tier::slow, MissKind::writeback, 2},
                            {2, Tier::slow, MissKind::migration_read, 64},
                            {3, Tier::fast, MissKind::migration_write, 64},
                            {4, Tier::slow, MissKind::read_miss, 5}};
  const auto d = aggregate(r);
  CHECK(d[0].read_misses == 3);
  CHECK(d[0].migration_write_bytes == 4096);
  CHECK(d[0].writeback_bytes() == 4096);
  CHECK(d[1].read_misses == 5);
  CHECK(d[1].writebacks == 2);
  CHECK(d[1].read_bytes() == 5 * 64 + 4096);
}
