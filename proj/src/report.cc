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

#include "hmsim/report.h"

#include <charconv>
#include <fstream>
#include <iterator>
#include <string>

#include <fmt/core.h>

namespace hmsim
{
namespace
{
constexpr std::array tier_fields{"read_bytes", "writeback_bytes", "read_misses", "writebacks", "migration_bytes"};

std::ofstream open_out(const std::filesystem::path& path)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
  out.flush();
  if (!out)
    throw Error(fmt::format("failed writing '{}'", path.string()));
}

std::string join(const std::vector<std::string>& cols)
{
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i)
      s += ',';
    s += cols[i];
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line)
{
  std::vector<std::string_view> out;
  for (;;) {
    const auto c = line.find(',');
    out.push_back(line.substr(0, c));
    if (c == std::string_view::npos)
      return out;
    line.remove_prefix(c + 1);
  }
}

void check_label(const std::string& label)
{
  if (label.find_first_of(",\n\r") != std::string::npos)
    throw Error(fmt::format("label '{}' cannot contain commas or line breaks", label));
}

// Reads a headered CSV, checking the header and every row's width.
std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path,
                                                 const std::vector<std::string>& columns)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line))
    throw Error(fmt::format("{}: empty file", path.string()));
  if (line != join(columns))
    throw Error(fmt::format("{}: unexpected header '{}'", path.string(), line));

  std::vector<std::vector<std::string>> rows;
  std::uint64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    const auto cells = split(line);
    if (cells.size() != columns.size())
      throw Error(fmt::format("{}:{}: expected {} fields, found {}", path.string(), lineno, columns.size(), cells.size()));
    rows.emplace_back(cells.begin(), cells.end());
  }
  return rows;
}

template <typename T>
T number(const std::string& s, const std::filesystem::path& path)
{
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw Error(fmt::format("{}: malformed number '{}'", path.string(), s));
  return v;
}
} // namespace

std::vector<std::string> epoch_csv_columns()
{
  std::vector<std::string> cols{"epoch", "simulated_time_ns", "cumulative_time_ns", "events", "relocations",
                                "cache_fills"};
  for (auto t : all_tiers)
    for (const auto* f : tier_fields)
      cols.push_back(fmt::format("{}_{}", to_string(t), f));
  return cols;
}

std::vector<std::string> summary_csv_columns()
{
  return {"label", "total_time_ns", "epochs", "events", "relocations", "mapping_digest", "policy", "fast_ratio"};
}

void write_epoch_csv(const std::filesystem::path& path, std::span<const EpochStats> epochs)
{
  auto out = open_out(path);
  std::string buf = join(epoch_csv_columns());
  buf += '\n';
  for (const auto& e : epochs) {
    auto it = std::back_inserter(buf);
    fmt::format_to(it, "{},{},{},{},{},{}", e.epoch_index, e.simulated_time_ns, e.cumulative_time_ns, e.events,
                   e.relocations, e.cache_fills);
    for (const auto& t : e.tiers)
      fmt::format_to(it, ",{},{},{},{},{}", t.read_bytes, t.writeback_bytes, t.read_misses, t.writebacks,
                     t.migration_bytes);
    buf += '\n';
  }
  out << buf;
  finish(out, path);
}

void write_summary_csv(const std::filesystem::path& path, const RunSummary& s)
{
  check_label(s.label);
  auto out = open_out(path);
  out << join(summary_csv_columns()) << '\n'
      << fmt::format("{},{},{},{},{},{},{},{}\n", s.label, s.total_time_ns, s.epochs, s.events, s.relocations,
                     s.mapping_digest, to_string(s.policy), s.fast_ratio);
  finish(out, path);
}

std::vector<EpochStats> read_epoch_csv(const std::filesystem::path& path)
{
  std::vector<EpochStats> out;
  for (const auto& row : read_table(path, epoch_csv_columns())) {
    EpochStats e;
    std::size_t i = 0;
    e.epoch_index = number<std::uint64_t>(row[i++], path);
    e.simulated_time_ns = number<double>(row[i++], path);
    e.cumulative_time_ns = number<double>(row[i++], path);
    e.events = number<std::uint64_t>(row[i++], path);
    e.relocations = number<std::uint64_t>(row[i++], path);
    e.cache_fills = number<std::uint64_t>(row[i++], path);
    for (auto& t : e.tiers) {
      t.read_bytes = number<std::uint64_t>(row[i++], path);
      t.writeback_bytes = number<std::uint64_t>(row[i++], path);
      t.read_misses = number<std::uint64_t>(row[i++], path);
      t.writebacks = number<std::uint64_t>(row[i++], path);
      t.migration_bytes = number<std::uint64_t>(row[i++], path);
    }
    out.push_back(e);
  }
  return out;
}

RunSummary read_summary_csv(const std::filesystem::path& path)
{
  const auto rows = read_table(path, summary_csv_columns());
  if (rows.size() != 1)
    throw Error(fmt::format("{}: expected one summary row, found {}", path.string(), rows.size()));
  const auto& r = rows.front();
  RunSummary s;
  s.label = r[0];
  s.total_time_ns = number<double>(r[1], path);
  s.epochs = number<std::uint64_t>(r[2], path);
  s.events = number<std::uint64_t>(r[3], path);
  s.relocations = number<std::uint64_t>(r[4], path);
  s.mapping_digest = number<std::uint64_t>(r[5], path);
  try {
    s.policy = parse_policy(r[6]);
  } catch (const SpecError& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
  s.fast_ratio = number<double>(r[7], path);
  return s;
}

void write_run(const std::filesystem::path& dir, const RunResult& result)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw Error(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  write_epoch_csv(dir / epochs_file, result.epochs);
  write_summary_csv(dir / summary_file, result.summary);
}

std::vector<ComparisonRow> compare_runs(std::span<const RunSummary> runs, std::string_view baseline)
{
  const RunSummary* base = nullptr;
  for (const auto& r : runs) {
    if (r.label != baseline)
      continue;
    if (base)
      throw Error(fmt::format("baseline label '{}' names more than one run", baseline));
    base = &r;
  }
  if (!base)
    throw Error(fmt::format("no run labelled '{}'", baseline));
  if (!(base->total_time_ns > 0))
    throw Error(fmt::format("baseline '{}' has no elapsed time", baseline));

  std::vector<ComparisonRow> rows;
  for (const auto& r : runs) {
    const double ratio = r.total_time_ns / base->total_time_ns;
    rows.push_back({r.label, r.total_time_ns, ratio, ratio - 1.0});
  }
  return rows;
}

void write_comparison_csv(const std::filesystem::path& path, std::span<const ComparisonRow> rows)
{
  auto out = open_out(path);
  std::string buf = "label,total_time_ns,total_time_s,slowdown,overhead\n";
  for (const auto& r : rows) {
    check_label(r.label);
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{}\n", r.label, r.total_time_ns, r.total_time_ns / 1e9,
                   r.slowdown, r.overhead);
  }
  out << buf;
  finish(out, path);
}

} // namespace hmsim
