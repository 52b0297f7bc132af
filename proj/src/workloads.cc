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

#include "hmsim/workloads.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <ranges>
#include <string>

#include <fmt/core.h>

namespace hmsim
{
std::string_view to_string(WorkloadKind k) noexcept
{
  switch (k) {
  case WorkloadKind::chase:
    return "chase";
  case WorkloadKind::chase_wb:
    return "chase_wb";
  case WorkloadKind::scan:
    return "scan";
  case WorkloadKind::scan_wb:
    return "scan_wb";
  case WorkloadKind::phased:
    return "phased";
  case WorkloadKind::external:
    return "external";
  }
  return "?";
}

WorkloadKind parse_workload_kind(std::string_view name)
{
  for (auto k : {WorkloadKind::chase, WorkloadKind::chase_wb, WorkloadKind::scan, WorkloadKind::scan_wb,
                 WorkloadKind::phased, WorkloadKind::external})
    if (name == to_string(k))
      return k;
  throw SpecError(fmt::format("unknown workload kind '{}'", name));
}

double default_mlp(WorkloadKind k) noexcept
{
  switch (k) {
  case WorkloadKind::scan:
  case WorkloadKind::scan_wb:
    return 16.0;
  default:
    return 1.0;
  }
}

namespace
{
bool is_chase(WorkloadKind k) { return k == WorkloadKind::chase || k == WorkloadKind::chase_wb; }
bool is_scan(WorkloadKind k) { return k == WorkloadKind::scan || k == WorkloadKind::scan_wb; }
} // namespace

void WorkloadSpec::validate() const
{
  if (kind != WorkloadKind::external && (buffer_bytes == 0 || buffer_bytes % cacheline_size != 0))
    throw SpecError(fmt::format("buffer of {} bytes is not a positive multiple of {}", buffer_bytes, cacheline_size));
  if (workers < 1 || workers > UINT16_MAX)
    throw SpecError("workers must be between 1 and 65535");
  if (epochs < 1)
    throw SpecError("workload needs at least one epoch");
  if (!(compute_ns_per_event >= 0))
    throw SpecError("compute time per event must be nonnegative");

  if (is_chase(kind) && buffer_bytes < 2 * cacheline_size)
    throw SpecError("pointer chase needs a buffer of at least two cachelines");

  if (kind == WorkloadKind::phased) {
    if (buffer_bytes % page_size != 0)
      throw SpecError("phased workload footprint must be a multiple of the page size");
    if (!(hot_fraction > 0 && hot_fraction <= 1))
      throw SpecError("hot_fraction must lie in (0, 1]");
    if (std::llround(hot_fraction * static_cast<double>(buffer_bytes / page_size)) < 1)
      throw SpecError("hot set is smaller than one page");
    if (phase_length < 1 || events_per_epoch < 1)
      throw SpecError("phase_length and events_per_epoch must be positive");
    if (!(zipf_s >= 0))
      throw SpecError("zipf exponent must be nonnegative");
    if (!(hot_access_share >= 0 && hot_access_share <= 1) || !(write_share >= 0 && write_share <= 1))
      throw SpecError("access shares must lie in [0, 1]");
  }
  if (kind == WorkloadKind::external && trace_path.empty())
    throw SpecError("external workload needs a trace path");
}

std::uint64_t WorkloadSpec::footprint_bytes() const noexcept
{
  if (is_scan(kind))
    return buffer_bytes * workers;
  return buffer_bytes;
}

std::vector<std::uint64_t> random_cycle(std::uint64_t n, std::uint64_t seed)
{
  std::vector<std::uint64_t> next(n);
  std::iota(next.begin(), next.end(), std::uint64_t{0});
  std::mt19937_64 rng(seed);
  // swapping only with strictly earlier slots never closes a short cycle
  for (std::uint64_t i = n; i-- > 1;) {
    std::uniform_int_distribution<std::uint64_t> pick(0, i - 1);
    std::swap(next[i], next[pick(rng)]);
  }
  return next;
}

ChaseSource::ChaseSource(const WorkloadSpec& spec) : spec_(spec)
{
  spec_.validate();
  if (!is_chase(spec_.kind))
    throw SpecError("chase source needs a chase workload");
  successor_ = random_cycle(spec_.buffer_bytes / cacheline_size, spec_.seed);
}

bool ChaseSource::next_epoch(Trace& out)
{
  out.clear();
  if (lap_ >= spec_.epochs)
    return false;
  const bool wb = spec_.kind == WorkloadKind::chase_wb;
  out.reserve(successor_.size() * (wb ? 2 : 1));
  for (std::size_t hop = 0; hop < successor_.size(); ++hop) {
    const auto addr = current_ * cacheline_size;
    out.push_back({AccessOp::read, addr, 0});
    // the store touches the object's second 8-byte word
    if (wb)
      out.push_back({AccessOp::write, addr + 8, 0});
    current_ = successor_[current_];
  }
  ++lap_;
  return true;
}

ScanSource::ScanSource(const WorkloadSpec& spec, std::uint64_t ram_bytes) : spec_(spec)
{
  spec_.validate();
  if (!is_scan(spec_.kind))
    throw SpecError("scan source needs a scan workload");
  if (ram_bytes != 0 && spec_.footprint_bytes() > ram_bytes)
    throw SpecError(fmt::format("{} workers x {} bytes do not fit in {} bytes of RAM", spec_.workers,
                                spec_.buffer_bytes, ram_bytes));
}

bool ScanSource::next_epoch(Trace& out)
{
  out.clear();
  if (pass_ >= spec_.epochs)
    return false;
  const bool wb = spec_.kind == WorkloadKind::scan_wb;
  const auto lines = spec_.buffer_bytes / cacheline_size;
  out.reserve(lines * spec_.workers * (wb ? 2 : 1));
  for (std::uint64_t i = 0; i < lines; ++i) {
    for (unsigned w = 0; w < spec_.workers; ++w) {
      const auto addr = w * spec_.buffer_bytes + i * cacheline_size;
      const auto worker = static_cast<std::uint16_t>(w);
      out.push_back({AccessOp::read, addr, worker});
      if (wb)
        out.push_back({AccessOp::write, addr, worker});
    }
  }
  ++pass_;
  return true;
}

PhasedSource::PhasedSource(const WorkloadSpec& spec)
    : spec_(spec), pages_(spec.buffer_bytes / page_size), rng_(spec.seed)
{
  spec_.validate();
  if (spec_.kind != WorkloadKind::phased)
    throw SpecError("phased source needs a phased workload");
}

void PhasedSource::draw_phase()
{
  const auto hot_count = static_cast<std::uint64_t>(std::llround(spec_.hot_fraction * static_cast<double>(pages_)));
  hot_.assign(hot_count, 0);
  std::ranges::sample(std::views::iota(PageIndex{0}, pages_), hot_.begin(), static_cast<std::ptrdiff_t>(hot_count),
                      rng_);
  std::ranges::shuffle(hot_, rng_);

  std::vector<double> weights(hot_count);
  for (std::uint64_t r = 0; r < hot_count; ++r)
    weights[r] = std::pow(static_cast<double>(r + 1), -spec_.zipf_s);
  zipf_ = std::discrete_distribution<std::uint64_t>(weights.begin(), weights.end());
}

bool PhasedSource::next_epoch(Trace& out)
{
  out.clear();
  if (epoch_ >= spec_.epochs)
    return false;
  if (epoch_ % spec_.phase_length == 0)
    draw_phase();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<PageIndex> any_page(0, pages_ - 1);
  std::uniform_int_distribution<std::uint64_t> any_line(0, lines_per_page - 1);

  out.reserve(spec_.events_per_epoch);
  for (std::uint64_t i = 0; i < spec_.events_per_epoch; ++i) {
    const auto page = unit(rng_) < spec_.hot_access_share ? hot_[zipf_(rng_)] : any_page(rng_);
    const auto addr = page * page_size + any_line(rng_) * cacheline_size;
    const auto op = unit(rng_) < spec_.write_share ? AccessOp::write : AccessOp::read;
    out.push_back({op, addr, 0});
  }
  ++epoch_;
  return true;
}

ExternalSource::ExternalSource(const WorkloadSpec& spec, std::uint64_t ram_bytes)
    : trace_(load_trace(spec.trace_path, ram_bytes)), chunk_(spec.events_per_epoch)
{
  if (chunk_ == 0)
    chunk_ = std::max<std::uint64_t>(trace_.size(), 1);
}

bool ExternalSource::next_epoch(Trace& out)
{
  out.clear();
  if (pos_ >= trace_.size())
    return false;
  const auto end = std::min<std::uint64_t>(pos_ + chunk_, trace_.size());
  out.assign(trace_.begin() + static_cast<std::ptrdiff_t>(pos_), trace_.begin() + static_cast<std::ptrdiff_t>(end));
  pos_ = end;
  return true;
}

bool BufferedSource::next_epoch(Trace& out)
{
  if (next_ >= epochs_.size()) {
    out.clear();
    return false;
  }
  out = epochs_[next_++];
  return true;
}

std::unique_ptr<TraceSource> make_source(const WorkloadSpec& spec, std::uint64_t ram_bytes)
{
  spec.validate();
  if (spec.kind != WorkloadKind::external && ram_bytes != 0 && spec.footprint_bytes() > ram_bytes)
    throw SpecError(fmt::format("workload footprint of {} bytes exceeds {} bytes of RAM", spec.footprint_bytes(), ram_bytes));
  switch (spec.kind) {
  case WorkloadKind::chase:
  case WorkloadKind::chase_wb:
    return std::make_unique<ChaseSource>(spec);
  case WorkloadKind::scan:
  case WorkloadKind::scan_wb:
    return std::make_unique<ScanSource>(spec, ram_bytes);
  case WorkloadKind::phased:
    return std::make_unique<PhasedSource>(spec);
  case WorkloadKind::external:
    return std::make_unique<ExternalSource>(spec, ram_bytes);
  }
  throw SpecError("unknown workload kind");
}

Trace drain(TraceSource& source)
{
  Trace all, epoch;
  while (source.next_epoch(epoch))
    all.insert(all.end(), epoch.begin(), epoch.end());
  return all;
}

Trace gen_chase(const WorkloadSpec& spec)
{
  ChaseSource src(spec);
  return drain(src);
}

Trace gen_scan(const WorkloadSpec& spec, std::uint64_t ram_bytes)
{
  ScanSource src(spec, ram_bytes);
  return drain(src);
}

Trace gen_phased(const WorkloadSpec& spec)
{
  PhasedSource src(spec);
  return drain(src);
}

ScanDemand scan_demand(const WorkloadSpec& spec, const CacheConfig& cache)
{
  spec.validate();
  cache.validate();
  if (!is_scan(spec.kind))
    throw SpecError("closed-form demand is only defined for scan workloads");

  const bool wb = spec.kind == WorkloadKind::scan_wb;
  const auto total_lines = spec.footprint_bytes() / cacheline_size;
  const auto sets = cache.sets();
  const auto ways = cache.ways();
  const auto passes = spec.epochs;

  ScanDemand d;
  d.events = total_lines * passes * (wb ? 2 : 1);
  d.scanned_bytes = total_lines * cacheline_size * passes;

  // buffers are contiguous from address 0, so sets differ by at most one line
  const auto base = total_lines / sets;
  const auto extra_sets = total_lines % sets;
  auto add_sets = [&](std::uint64_t count, std::uint64_t lines_in_set) {
    if (count == 0 || lines_in_set == 0)
      return;
    if (lines_in_set <= ways) {
      d.read_misses += count * lines_in_set;
      return;
    }
    const auto misses = lines_in_set * passes;
    d.read_misses += count * misses;
    if (wb)
      d.writebacks += count * (misses - ways);
  };
  add_sets(extra_sets, base + 1);
  add_sets(sets - extra_sets, base);
  return d;
}

namespace
{
bool is_binary(const std::filesystem::path& path) { return path.extension() == ".bin"; }

template <typename T>
void put_le(std::ostream& out, T v)
{
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.put(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <typename T>
bool get_le(std::istream& in, T& v)
{
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const auto c = in.get();
    if (c == std::char_traits<char>::eof())
      return false;
    acc |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  v = static_cast<T>(acc);
  return true;
}

std::uint64_t parse_number(std::string_view s, const std::filesystem::path& path, std::uint64_t lineno)
{
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw TraceFormatError(fmt::format("{}:{}: malformed number '{}'", path.string(), lineno, s));
  return v;
}

AccessEvent checked_event(AccessOp op, std::uint64_t addr, std::uint64_t worker, std::uint64_t ram_bytes,
                          const std::filesystem::path& path, std::uint64_t record)
{
  if (addr >= ram_bytes)
    throw AddressRangeError(fmt::format("{}: record {}: address {:#x} outside {} bytes of RAM", path.string(), record,
                                        addr, ram_bytes));
  if (worker > UINT16_MAX)
    throw TraceFormatError(fmt::format("{}: record {}: worker id {} too large", path.string(), record, worker));
  return {op, addr, static_cast<std::uint16_t>(worker)};
}
} // namespace

Trace load_trace(const std::filesystem::path& path, std::uint64_t ram_bytes)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw TraceFormatError(fmt::format("cannot open trace '{}'", path.string()));

  Trace trace;
  if (is_binary(path)) {
    std::uint64_t n = 0;
    if (!get_le(in, n)) {
      if (in.eof())
        return trace;
      throw TraceFormatError(fmt::format("{}: missing record count", path.string()));
    }
    trace.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      std::uint8_t op = 0;
      std::uint64_t addr = 0;
      std::uint16_t worker = 0;
      if (!get_le(in, op) || !get_le(in, addr) || !get_le(in, worker))
        throw TraceFormatError(fmt::format("{}: truncated at record {} of {}", path.string(), i, n));
      if (op > 1)
        throw TraceFormatError(fmt::format("{}: record {}: unknown op {}", path.string(), i, op));
      trace.push_back(checked_event(static_cast<AccessOp>(op), addr, worker, ram_bytes, path, i));
    }
    if (in.peek() != std::char_traits<char>::eof())
      throw TraceFormatError(fmt::format("{}: trailing bytes after {} records", path.string(), n));
    return trace;
  }

  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::string_view sv(line);
    const auto c1 = sv.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
    if (c2 == std::string_view::npos || sv.find(',', c2 + 1) != std::string_view::npos)
      throw TraceFormatError(fmt::format("{}:{}: expected OP,address,worker", path.string(), lineno));
    const auto op_s = sv.substr(0, c1);
    AccessOp op;
    if (op_s == "R")
      op = AccessOp::read;
    else if (op_s == "W")
      op = AccessOp::write;
    else
      throw TraceFormatError(fmt::format("{}:{}: unknown op '{}'", path.string(), lineno, op_s));
    const auto addr = parse_number(sv.substr(c1 + 1, c2 - c1 - 1), path, lineno);
    const auto worker = parse_number(sv.substr(c2 + 1), path, lineno);
    trace.push_back(checked_event(op, addr, worker, ram_bytes, path, lineno));
  }
  return trace;
}

void save_trace(const std::filesystem::path& path, std::span<const AccessEvent> trace)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(fmt::format("cannot write trace '{}'", path.string()));
  if (is_binary(path)) {
    put_le<std::uint64_t>(out, trace.size());
    for (const auto& ev : trace) {
      put_le<std::uint8_t>(out, static_cast<std::uint8_t>(ev.op));
      put_le<std::uint64_t>(out, ev.address);
      put_le<std::uint16_t>(out, ev.worker);
    }
  } else {
    std::string buf;
    for (const auto& ev : trace) {
      buf.clear();
      fmt::format_to(std::back_inserter(buf), "{},{},{}\n", ev.op == AccessOp::read ? 'R' : 'W', ev.address, ev.worker);
      out << buf;
    }
  }
  if (!out)
    throw Error(fmt::format("failed writing trace '{}'", path.string()));
}

} // namespace hmsim
