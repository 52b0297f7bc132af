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
 * @file report.h
 * @brief CSV output of runs and cross-run comparison.
 *
 * A run directory holds epochs.csv (one row per epoch) and summary.csv (one
 * row). Floating-point fields use the shortest representation that round
 * trips, so identical runs give byte-identical files.
 */

#ifndef HMSIM_REPORT_H
#define HMSIM_REPORT_H

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hmsim/engine.h"

namespace hmsim
{
inline constexpr std::string_view epochs_file = "epochs.csv";
inline constexpr std::string_view summary_file = "summary.csv";

std::vector<std::string> epoch_csv_columns();
std::vector<std::string> summary_csv_columns();

void write_epoch_csv(const std::filesystem::path& path, std::span<const EpochStats> epochs);
void write_summary_csv(const std::filesystem::path& path, const RunSummary& summary);
std::vector<EpochStats> read_epoch_csv(const std::filesystem::path& path);
RunSummary read_summary_csv(const std::filesystem::path& path);

// Creates `dir` if needed and writes both files.
void write_run(const std::filesystem::path& dir, const RunResult& result);

struct ComparisonRow {
  std::string label;
  double total_time_ns = 0;
  // T / T(baseline)
  double slowdown = 0;
  // T / T(baseline) - 1
  double overhead = 0;
};

std::vector<ComparisonRow> compare_runs(std::span<const RunSummary> runs, std::string_view baseline);
void write_comparison_csv(const std::filesystem::path& path, std::span<const ComparisonRow> rows);

} // namespace hmsim

#endif
