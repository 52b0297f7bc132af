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
 * @file workloads.h
 * @brief Synthetic benchmark traces and external trace I/O.
 *
 * - chase / chase_wb: pointer chase over a single random cycle of cachelines,
 *   one lap per epoch; the _wb variant also stores into every visited line.
 * - scan / scan_wb: each worker sweeps its own disjoint buffer in ascending
 *   line order, one pass per epoch, workers interleaved round-robin.
 * - phased: a hot page set redrawn every `phase_length` epochs; most accesses
 *   are Zipf-distributed over the hot set, the rest uniform over the buffer.
 * - external: events read from a trace file.
 *
 * Generators stream one epoch at a time and are pure functions of the spec.
 */

#ifndef HMSIM_WORKLOADS_H
#define HMSIM_WORKLOADS_H

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "hmsim/common.h"
#include "hmsim/memmodel.h"

namespace hmsim
{
enum class WorkloadKind : std::uint8_t { chase, chase_wb, scan, scan_wb, phased, external };
std::string_view to_string(WorkloadKind k) noexcept;
WorkloadKind parse_workload_kind(std::string_view name);

// Overlap assumed when a config does not set one: chases serialise, scans overlap.
double default_mlp(WorkloadKind k) noexcept;

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::phased;
  // chase/scan: buffer per worker; phased: footprint the pages are drawn from
  std::uint64_t buffer_bytes = 1 * GiB;
  unsigned workers = 1;
  // laps, passes or generator epochs
  std::uint64_t epochs = 1;
  std::uint64_t seed = 1;

  double zipf_s = 1.0;
  std::uint64_t phase_length = 24;
  double hot_fraction = 0.01;
  std::uint64_t events_per_epoch = 100000;
  double hot_access_share = 0.9;
  double write_share = 1.0 / 3.0;

  double compute_ns_per_event = 0.0;
  std::filesystem::path trace_path;

  void validate() const;
  // Bytes of guest RAM the workload touches.
  std::uint64_t footprint_bytes() const noexcept;
};

using Trace = std::vector<AccessEvent>;

class TraceSource
{
public:
  virtual ~TraceSource() = default;
  // Replaces `out` with the next epoch of events; false once exhausted.
  virtual bool next_epoch(Trace& out) = 0;
};

class ChaseSource : public TraceSource
{
public:
  explicit ChaseSource(const WorkloadSpec& spec);
  bool next_epoch(Trace& out) override;
  // successor[i] is the line visited after line i
  std::span<const std::uint64_t> successor() const noexcept { return successor_; }

private:
  WorkloadSpec spec_;
  std::vector<std::uint64_t> successor_;
  std::uint64_t current_ = 0;
  std::uint64_t lap_ = 0;
};

class ScanSource : public TraceSource
{
public:
  ScanSource(const WorkloadSpec& spec, std::uint64_t ram_bytes);
  bool next_epoch(Trace& out) override;

private:
  WorkloadSpec spec_;
  std::uint64_t pass_ = 0;
};

class PhasedSource : public TraceSource
{
public:
  explicit PhasedSource(const WorkloadSpec& spec);
  bool next_epoch(Trace& out) override;
  // Hot pages of the current phase in Zipf rank order.
  std::span<const PageIndex> hot_pages() const noexcept { return hot_; }

private:
  void draw_phase();

  WorkloadSpec spec_;
  std::uint64_t pages_;
  std::uint64_t epoch_ = 0;
  std::mt19937_64 rng_;
  std::vector<PageIndex> hot_;
  std::discrete_distribution<std::uint64_t> zipf_;
};

class ExternalSource : public TraceSource
{
public:
  ExternalSource(const WorkloadSpec& spec, std::uint64_t ram_bytes);
  bool next_epoch(Trace& out) override;

private:
  Trace trace_;
  std::uint64_t chunk_;
  std::uint64_t pos_ = 0;
};

// Replays epochs held in memory.
class BufferedSource : public TraceSource
{
public:
  explicit BufferedSource(std::vector<Trace> epochs) : epochs_(std::move(epochs)) {}
  bool next_epoch(Trace& out) override;

private:
  std::vector<Trace> epochs_;
  std::size_t next_ = 0;
};

// ram_bytes bounds every generated address; 0 means the workload footprint.
std::unique_ptr<TraceSource> make_source(const WorkloadSpec& spec, std::uint64_t ram_bytes = 0);

Trace drain(TraceSource& source);
Trace gen_chase(const WorkloadSpec& spec);
Trace gen_scan(const WorkloadSpec& spec, std::uint64_t ram_bytes = 0);
Trace gen_phased(const WorkloadSpec& spec);

// Single random cycle over n >= 2 elements (Sattolo's shuffle).
std::vector<std::uint64_t> random_cycle(std::uint64_t n, std::uint64_t seed);

/**
 * Closed-form LLC outcome of a scan workload started on a cold cache. Every
 * set sees the same cyclic line sequence on each pass, so a set either keeps
 * its lines resident (n <= ways) or misses on every access under LRU.
 */
struct ScanDemand {
  std::uint64_t events = 0;
  std::uint64_t read_misses = 0;
  std::uint64_t writebacks = 0;
  std::uint64_t scanned_bytes = 0;
};
ScanDemand scan_demand(const WorkloadSpec& spec, const CacheConfig& cache);

// Text "OP,address,worker" lines; a ".bin" extension selects the binary
// form: u64 LE record count, then (u8 op, u64 LE address, u16 LE worker).
Trace load_trace(const std::filesystem::path& path, std::uint64_t ram_bytes);
void save_trace(const std::filesystem::path& path, std::span<const AccessEvent> trace);

} // namespace hmsim

#endif
