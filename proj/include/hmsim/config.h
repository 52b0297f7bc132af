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
 * @file config.h
 * @brief INI-style run, workload and tier files.
 *
 * Sections of a run file: [run], [fast_tier], [slow_tier], [cache], [mapping],
 * [policy], [monitor], [workload]. Every section and key is optional; unknown
 * ones are rejected. Sizes take an optional B/KiB/MiB/GiB suffix. Relative
 * paths are resolved against the directory of the file that names them.
 */

#ifndef HMSIM_CONFIG_H
#define HMSIM_CONFIG_H

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string_view>

#include "hmsim/engine.h"

namespace hmsim
{
// "4096", "64KiB", "4 GiB"
std::uint64_t parse_size(std::string_view text);

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// A workload file holds a single [workload] section.
WorkloadSpec load_workload_spec(const std::filesystem::path& path);

// A tier file holds a single [tier] section: a preset and/or explicit fields.
DeviceTier load_tier_file(const std::filesystem::path& path);

} // namespace hmsim

#endif
