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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

#include "hmsim/workloads.h"

using namespace hmsim;

namespace
{
std::filesystem::path scratch(const std::string& name)
{
  auto dir = std::filesystem::temp_directory_path() / "hmsim_test_workloads";
  std::filesystem::create_directories(dir);
  return dir / name;
}

WorkloadSpec spec(WorkloadKind kind, std::uint64_t buffer, unsigned workers = 1, std::uint64_t epochs = 1)
{
  WorkloadSpec s;
  s.kind = kind;
  s.buffer_bytes = buffer;
  s.workers = workers;
  s.epochs = epochs;
  return s;
}

// Upper critical value of the chi-square distribution.
double chi2_critical(double dof, double alpha)
{
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), alpha));
}
} // namespace

TEST_CASE("random_cycle is a single cycle through every element")
{
  for (std::uint64_t n : {2u, 3u, 10u, 257u, 5000u}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto next = random_cycle(n, seed);
      std::vector<bool> seen(n, false);
      std::uint64_t cur = 0, steps = 0;
      do {
        REQUIRE(!seen[cur]);
        seen[cur] = true;
        cur = next[cur];
        ++steps;
      } while (cur != 0);
      CHECK(steps == n);
    }
  }
  CHECK(random_cycle(100, 1) != random_cycle(100, 2));
  CHECK(random_cycle(100, 1) == random_cycle(100, 1));
}

TEST_CASE("pointer chase visits each cacheline once per lap")
{
  auto s = spec(WorkloadKind::chase, 64 * KiB, 1, 2);
  const auto t = gen_chase(s);
  REQUIRE(t.size() == 2 * 1024);
  std::set<std::uint64_t> lap1, lap2;
  for (std::size_t i = 0; i < 1024; ++i) {
    CHECK(t[i].op == AccessOp::read);
    CHECK(t[i].address % 64 == 0);
    lap1.insert(t[i].address);
    lap2.insert(t[1024 + i].address);
  }
  CHECK(lap1.size() == 1024);
  CHECK(lap2 == lap1);
  CHECK(t[0].address == 0);
  // the second lap replays the first
  CHECK(std::equal(t.begin(), t.begin() + 1024, t.begin() + 1024));

  s.kind = WorkloadKind::chase_wb;
  const auto w = gen_chase(s);
  REQUIRE(w.size() == 4 * 1024);
  for (std::size_t i = 0; i < w.size(); i += 2) {
    CHECK(w[i].op == AccessOp::read);
    CHECK(w[i + 1].op == AccessOp::write);
    CHECK(w[i + 1].address / 64 == w[i].address / 64);
  }
}

TEST_CASE("scan interleaves workers round-robin over disjoint buffers")
{
  const auto t = gen_scan(spec(WorkloadKind::scan, 4 * KiB, 3, 2));
  REQUIRE(t.size() == 2 * 3 * 64);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto line = (i / 3) % 64;
    const auto w = i % 3;
    CHECK(t[i].worker == w);
    CHECK(t[i].address == w * 4096 + line * 64);
    CHECK(t[i].op == AccessOp::read);
  }
  const auto wb = gen_scan(spec(WorkloadKind::scan_wb, 4 * KiB, 2, 1));
  REQUIRE(wb.size() == 2 * 2 * 64);
  CHECK(wb[0] == AccessEvent{AccessOp::read, 0, 0});
  CHECK(wb[1] == AccessEvent{AccessOp::write, 0, 0});
  CHECK(wb[2] == AccessEvent{AccessOp::read, 4096, 1});

  CHECK_THROWS_AS(ScanSource(spec(WorkloadKind::scan, 4 * KiB, 3), 8 * KiB), SpecError);
}

TEST_CASE("workload spec validation")
{
  CHECK_THROWS_AS(spec(WorkloadKind::scan, 100).validate(), SpecError);
  CHECK_THROWS_AS(spec(WorkloadKind::chase, 64).validate(), SpecError);
  CHECK_THROWS_AS(spec(WorkloadKind::scan, 4096, 0).validate(), SpecError);
  CHECK_THROWS_AS(spec(WorkloadKind::scan, 4096, 1, 0).validate(), SpecError);
  auto p = spec(WorkloadKind::phased, 4 * MiB);
  p.hot_fraction = 0;
  CHECK_THROWS_AS(p.validate(), SpecError);
  p.hot_fraction = 0.0001;
  CHECK_THROWS_AS(p.validate(), SpecError);
  CHECK_THROWS_AS(spec(WorkloadKind::external, 0).validate(), SpecError);
  CHECK_THROWS_AS(parse_workload_kind("random"), SpecError);
  CHECK(parse_workload_kind("scan_wb") == WorkloadKind::scan_wb);
  CHECK(default_mlp(WorkloadKind::scan) == 16);
  CHECK(default_mlp(WorkloadKind::chase) == 1);
  CHECK(spec(WorkloadKind::scan, 4096, 5).footprint_bytes() == 5 * 4096);
}

TEST_CASE("phased workload: hot set per phase, deterministic per seed")
{
  auto s = spec(WorkloadKind::phased, 16 * MiB, 1, 6);
  s.hot_fraction = 0.05;
  s.phase_length = 3;
  s.events_per_epoch = 2000;
  PhasedSource src(s);
  Trace t;
  std::vector<std::vector<PageIndex>> hot;
  while (src.next_epoch(t)) {
    CHECK(t.size() == 2000);
    hot.emplace_back(src.hot_pages().begin(), src.hot_pages().end());
    for (const auto& ev : t)
      REQUIRE(ev.address < 16 * MiB);
  }
  REQUIRE(hot.size() == 6);
  CHECK(hot[0].size() == 205);
  CHECK(std::set<PageIndex>(hot[0].begin(), hot[0].end()).size() == 205);
  CHECK(hot[0] == hot[2]);
  CHECK(hot[3] == hot[5]);
  CHECK(hot[0] != hot[3]);

  CHECK(gen_phased(s) == gen_phased(s));
  auto other = s;
  other.seed = 2;
  CHECK(gen_phased(s) != gen_phased(other));
}

TEST_CASE("phased workload frequencies follow Zipf over the hot set (chi-square)")
{
  auto s = spec(WorkloadKind::phased, 64 * MiB, 1, 1);
  s.hot_fraction = 20.0 / 16384.0;
  s.events_per_epoch = 200000;
  s.zipf_s = 1.0;
  PhasedSource src(s);
  Trace t;
  REQUIRE(src.next_epoch(t));
  const std::vector<PageIndex> hot(src.hot_pages().begin(), src.hot_pages().end());
  REQUIRE(hot.size() == 20);

  std::map<PageIndex, double> counts;
  double writes = 0;
  for (const auto& ev : t) {
    counts[page_of(ev.address)] += 1;
    writes += ev.op == AccessOp::write;
  }
  const double n = static_cast<double>(t.size());
  const double pages = 16384;
  double h = 0;
  for (int r = 1; r <= 20; ++r)
    h += 1.0 / r;

  // expected share of each hot rank: Zipf part plus its slice of the uniform part
  double chi2 = 0;
  double hot_total = 0;
  for (std::size_t r = 0; r < hot.size(); ++r) {
    const double p = 0.9 * (1.0 / static_cast<double>(r + 1)) / h + 0.1 / pages;
    const double expect = n * p;
    const double got = counts[hot[r]];
    hot_total += got;
    chi2 += (got - expect) * (got - expect) / expect;
  }
  const double p_rest = 1.0 - 0.9 - 0.1 * 20 / pages;
  const double rest = n - hot_total;
  chi2 += (rest - n * p_rest) * (rest - n * p_rest) / (n * p_rest);
  CHECK(chi2 < chi2_critical(20, 0.001));

  // two reads to one write
  const double se = std::sqrt(n / 3 * 2 / 3);
  CHECK(std::abs(writes - n / 3) < 5 * se);
}

TEST_CASE("uniform background covers the whole buffer evenly (chi-square)")
{
  auto s = spec(WorkloadKind::phased, 256 * KiB, 1, 1);
  s.hot_fraction = 1.0 / 64;
  s.hot_access_share = 0.0;
  s.events_per_epoch = 64000;
  const auto t = gen_phased(s);
  std::vector<double> counts(64, 0);
  for (const auto& ev : t)
    counts[page_of(ev.address)] += 1;
  double chi2 = 0;
  for (auto c : counts)
    chi2 += (c - 1000) * (c - 1000) / 1000;
  CHECK(chi2 < chi2_critical(63, 0.001));
}

TEST_CASE("closed-form scan demand agrees with the streamed LLC [property]")
{
  std::mt19937_64 rng(12);
  for (int c = 0; c < 150; ++c) {
    CacheConfig cache;
    const unsigned assoc_choices[] = {1, 2, 4, 8, 16, CacheConfig::fully_associative};
    cache.associativity = assoc_choices[rng() % 6];
    const auto ways = cache.associativity == 0 ? 1 : cache.associativity;
    cache.llc_capacity = 64 * ways * (1 + rng() % 32);
    const auto kind = rng() % 2 ? WorkloadKind::scan : WorkloadKind::scan_wb;
    auto s = spec(kind, 64 * (1 + rng() % 600), 1 + static_cast<unsigned>(rng() % 4), 1 + rng() % 4);
    CAPTURE(c);
    const auto trace = gen_scan(s);
    const auto d = aggregate(llc_filter(trace, cache, s.footprint_bytes()))[index_of(Tier::slow)];
    const auto closed = scan_demand(s, cache);
    REQUIRE(closed.events == trace.size());
    REQUIRE(closed.read_misses == d.read_misses);
    REQUIRE(closed.writebacks == d.writebacks);
    REQUIRE(closed.scanned_bytes == s.footprint_bytes() * s.epochs);
  }
}

TEST_CASE("trace files round trip in text and binary form")
{
  auto s = spec(WorkloadKind::phased, 1 * MiB, 1, 2);
  s.events_per_epoch = 500;
  auto t = gen_phased(s);
  t.push_back({AccessOp::write, 1 * MiB - 1, 7});
  for (const auto* name : {"trace.txt", "trace.bin"}) {
    const auto path = scratch(name);
    save_trace(path, t);
    CHECK(load_trace(path, 1 * MiB) == t);
    CHECK_THROWS_AS(load_trace(path, 1 * MiB - 64), AddressRangeError);
  }
  CHECK(std::filesystem::file_size(scratch("trace.bin")) == 8 + t.size() * 11);
}

TEST_CASE("text trace parsing")
{
  const auto path = scratch("parse.txt");
  {
    std::ofstream out(path);
    out << "R,0,0\nW,0x40,1\r\n\nR,4095,65535\n";
  }
  const auto t = load_trace(path, 4096);
  REQUIRE(t.size() == 3);
  CHECK(t[1] == AccessEvent{AccessOp::write, 64, 1});
  CHECK(t[2].worker == 65535);

  auto bad = [&](const std::string& text) {
    {
      std::ofstream out(path);
      out << text;
    }
    return load_trace(path, 4096);
  };
  CHECK_THROWS_AS(bad("X,0,0\n"), TraceFormatError);
  CHECK_THROWS_AS(bad("R,0\n"), TraceFormatError);
  CHECK_THROWS_AS(bad("R,zz,0\n"), TraceFormatError);
  CHECK_THROWS_AS(bad("R,0,0,0\n"), TraceFormatError);
  CHECK_THROWS_AS(bad("R,0,70000\n"), TraceFormatError);
  CHECK_THROWS_AS(bad("R,4096,0\n"), AddressRangeError);
  CHECK(bad("").empty());
  CHECK_THROWS_AS(load_trace(scratch("missing.txt"), 4096), TraceFormatError);
}

TEST_CASE("binary trace errors")
{
  const auto path = scratch("bad.bin");
  {
    std::ofstream out(path, std::ios::binary);
    const char header[8] = {2, 0, 0, 0, 0, 0, 0, 0};
    out.write(header, 8);
    const char rec[11] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    out.write(rec, 11);
  }
  CHECK_THROWS_AS(load_trace(path, 4096), TraceFormatError);
}

TEST_CASE("external source chunks a trace into epochs")
{
  const auto path = scratch("ext.txt");
  Trace t;
  for (std::uint64_t i = 0; i < 10; ++i)
    t.push_back({AccessOp::read, i * 64, 0});
  save_trace(path, t);
  WorkloadSpec s;
  s.kind = WorkloadKind::external;
  s.trace_path = path;
  s.events_per_epoch = 4;
  auto src = make_source(s, 4096);
  Trace e;
  std::vector<std::size_t> sizes;
  while (src->next_epoch(e))
    sizes.push_back(e.size());
  CHECK(sizes == std::vector<std::size_t>{4, 4, 2});
}

TEST_CASE("generators stop after the configured epochs")
{
  for (auto kind : {WorkloadKind::chase, WorkloadKind::scan, WorkloadKind::phased}) {
    auto s = spec(kind, 64 * KiB, 1, 3);
    s.hot_fraction = 0.1;
    s.events_per_epoch = 10;
    auto src = make_source(s);
    Trace t;
    int n = 0;
    while (src->next_epoch(t))
      ++n;
    CHECK(n == 3);
    CHECK(t.empty());
  }
  CHECK_THROWS_AS(make_source(spec(WorkloadKind::chase, 64 * KiB), 4096), SpecError);
}
