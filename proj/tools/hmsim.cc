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

#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "hmsim/config.h"
#include "hmsim/engine.h"
#include "hmsim/report.h"
#include "hmsim/workloads.h"

namespace
{
using namespace hmsim;

struct SimulateArgs {
  std::string config;
  std::optional<std::string> policy;
  std::optional<double> fast_ratio;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> label;
  std::string out;
  bool keep_partial = false;
  std::string heat_dump;
  std::string mapping_dump;
};

// Writes "epoch,page,score" for every page with a nonzero decayed score.
class HeatDump
{
public:
  explicit HeatDump(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc)
  {
    if (!out_)
      throw Error(fmt::format("cannot write '{}'", path));
    out_ << "epoch,page,score\n";
  }

  void operator()(const EpochView& v)
  {
    std::string buf;
    const auto scores = v.heat.scores();
    for (PageIndex p = 0; p < scores.size(); ++p)
      if (scores[p] > 0)
        fmt::format_to(std::back_inserter(buf), "{},{},{}\n", v.stats.epoch_index, p, scores[p]);
    out_ << buf;
    if (!out_)
      throw Error(fmt::format("failed writing '{}'", path_));
  }

private:
  std::string path_;
  std::ofstream out_;
};

int simulate(const SimulateArgs& a)
{
  auto config = load_run_config(a.config);
  if (a.policy)
    config.policy.kind = parse_policy(*a.policy);
  if (a.fast_ratio)
    config.fast_ratio = *a.fast_ratio;
  if (a.seed)
    config.workload.seed = *a.seed;
  if (a.label)
    config.label = *a.label;
  const std::filesystem::path out = a.out.empty() ? std::filesystem::path(config.label) : std::filesystem::path(a.out);

  std::optional<HeatDump> dump;
  if (!a.heat_dump.empty())
    dump.emplace(a.heat_dump);
  EpochObserver observer;
  if (dump)
    observer = [&](const EpochView& v) { (*dump)(v); };

  RunResult result;
  try {
    result = run(config, observer);
  } catch (const SimulationError& e) {
    if (a.keep_partial) {
      write_run(out, e.partial());
      fmt::print(stderr, "hmsim: partial results for {} epochs written to {}\n", e.partial().epochs.size(),
                 out.string());
    }
    throw;
  }

  write_run(out, result);
  if (!a.mapping_dump.empty()) {
    std::ofstream m(a.mapping_dump, std::ios::trunc);
    if (!m)
      throw Error(fmt::format("cannot write '{}'", a.mapping_dump));
    dump_mapping(result.mapping, m);
  }
  const auto& s = result.summary;
  fmt::print("{}: {} epochs, {} events, {} relocations, {} s simulated -> {}\n", s.label, s.epochs, s.events,
             s.relocations, s.total_time_ns / 1e9, out.string());
  return 0;
}

int gen_trace(const std::string& spec_path, const std::string& out)
{
  const auto spec = load_workload_spec(spec_path);
  if (spec.kind == WorkloadKind::external)
    throw Error("gen-trace needs a synthetic workload");
  auto source = make_source(spec);
  const auto trace = drain(*source);
  save_trace(out, trace);
  fmt::print("{} events written to {}\n", trace.size(), out);
  return 0;
}

int report(const std::vector<std::string>& dirs, const std::string& baseline, const std::string& out)
{
  std::vector<RunSummary> runs;
  for (const auto& d : dirs)
    runs.push_back(read_summary_csv(std::filesystem::path(d) / summary_file));
  const auto rows = compare_runs(runs, baseline);
  write_comparison_csv(out, rows);
  for (const auto& r : rows)
    fmt::print("{:<24} {:>14.3f} s  slowdown {:.4f}\n", r.label, r.total_time_ns / 1e9, r.slowdown);
  return 0;
}
} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Trace-driven hybrid DRAM/NVM memory simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run one configuration and write epochs.csv and summary.csv");
  simulate_cmd->add_option("--config", sim.config, "Run configuration file")->required()->check(CLI::ExistingFile);
  simulate_cmd->add_option("--policy", sim.policy, "raminate, none, dram_cache or static_oracle");
  simulate_cmd->add_option("--fast-ratio", sim.fast_ratio, "Share of guest RAM backed by the fast tier")
      ->check(CLI::Range(0.0, 1.0));
  simulate_cmd->add_option("--seed", sim.seed, "Workload seed");
  simulate_cmd->add_option("--label", sim.label, "Run label used in summaries");
  simulate_cmd->add_option("--out", sim.out, "Output directory (default: the run label)");
  simulate_cmd->add_flag("--keep-partial", sim.keep_partial, "Write the finished epochs if the run fails");
  simulate_cmd->add_option("--dump-heat", sim.heat_dump, "Write per-epoch page scores to this CSV");
  simulate_cmd->add_option("--dump-mapping", sim.mapping_dump, "Write the final page mapping to this file");

  std::string spec_path, trace_out;
  auto* gen_cmd = app.add_subcommand("gen-trace", "Write a synthetic workload as a trace file");
  gen_cmd->add_option("--spec", spec_path, "Workload file")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", trace_out, "Trace file (.bin for the binary form)")->required();

  std::vector<std::string> run_dirs;
  std::string baseline, report_out;
  auto* report_cmd = app.add_subcommand("report", "Compare the elapsed times of finished runs");
  report_cmd->add_option("--runs", run_dirs, "Run output directories")->required();
  report_cmd->add_option("--baseline", baseline, "Label of the reference run")->required();
  report_cmd->add_option("--out", report_out, "Comparison CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate_cmd)
      return simulate(sim);
    if (*gen_cmd)
      return gen_trace(spec_path, trace_out);
    if (*report_cmd)
      return report(run_dirs, baseline, report_out);
  } catch (const std::exception& e) {
    fmt::print(stderr, "hmsim: {}\n", e.what());
    return 1;
  }
  return 1;
}
