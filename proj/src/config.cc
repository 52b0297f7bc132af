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

#include "hmsim/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>

namespace hmsim
{
namespace
{
using boost::property_tree::ptree;

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// One section of an INI file; each key must be consumed exactly once.
class Section
{
public:
  Section(const ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool has(const std::string& key) const { return tree_ && tree_->get_child_optional(key); }

  std::string text(const std::string& key)
  {
    used_.insert(key);
    return std::string(trim(tree_->get<std::string>(key)));
  }

  [[noreturn]] void bad(const std::string& key, std::string_view why) const
  {
    throw ConfigError(fmt::format("[{}] {}: {}", name_, key, why));
  }

  template <typename T>
  void integer(const std::string& key, T& out)
  {
    if (!has(key))
      return;
    const auto s = text(key);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
      bad(key, fmt::format("expected an unsigned integer, got '{}'", s));
    if (v > std::numeric_limits<T>::max())
      bad(key, "value too large");
    out = static_cast<T>(v);
  }

  void real(const std::string& key, double& out)
  {
    if (!has(key))
      return;
    const auto s = text(key);
    try {
      std::size_t used = 0;
      out = std::stod(s, &used);
      if (used != s.size())
        throw std::invalid_argument(s);
    } catch (const std::exception&) {
      bad(key, fmt::format("expected a number, got '{}'", s));
    }
  }

  void size(const std::string& key, std::uint64_t& out)
  {
    if (!has(key))
      return;
    const auto s = text(key);
    try {
      out = parse_size(s);
    } catch (const ConfigError& e) {
      bad(key, e.what());
    }
  }

  void boolean(const std::string& key, bool& out)
  {
    if (!has(key))
      return;
    auto s = text(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "yes" || s == "1" || s == "on")
      out = true;
    else if (s == "false" || s == "no" || s == "0" || s == "off")
      out = false;
    else
      bad(key, fmt::format("expected true or false, got '{}'", s));
  }

  void finish() const
  {
    if (!tree_)
      return;
    for (const auto& [key, child] : *tree_)
      if (!used_.count(key))
        throw ConfigError(fmt::format("[{}]: unknown key '{}'", name_, key));
  }

private:
  const ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

Section section(const ptree& root, const std::string& name)
{
  const auto child = root.get_child_optional(name);
  return Section(child ? &*child : nullptr, name);
}

ptree read_ini(std::istream& in, const std::string& what)
{
  ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}: line {}: {}", what, e.line(), e.message()));
  }
  for (const auto& [key, child] : root)
    if (child.empty() && !child.data().empty())
      throw ConfigError(fmt::format("{}: key '{}' outside any section", what, key));
  return root;
}

ptree read_ini_file(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  return read_ini(in, path.string());
}

std::filesystem::path resolve_path(const std::filesystem::path& base_dir, const std::string& p)
{
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

DeviceTier read_tier(Section& s, const std::filesystem::path& base_dir, DeviceTier tier)
{
  if (s.has("preset") && s.has("file"))
    s.bad("file", "give either a preset or a file, not both");
  if (s.has("preset")) {
    const auto name = s.text("preset");
    try {
      tier = tier_preset(name);
    } catch (const SpecError&) {
      s.bad("preset", fmt::format("no tier preset named '{}'", name));
    }
  }
  if (s.has("file"))
    tier = load_tier_file(resolve_path(base_dir, s.text("file")));

  if (s.has("name"))
    tier.name = s.text("name");
  s.real("read_latency_ns", tier.read_latency_ns);
  s.real("writeback_latency_ns", tier.writeback_latency_ns);
  double gb = tier.read_bandwidth_per_channel / GBps;
  s.real("read_bandwidth_per_channel_gbps", gb);
  tier.read_bandwidth_per_channel = gb * GBps;
  gb = tier.writeback_bandwidth_per_channel / GBps;
  s.real("writeback_bandwidth_per_channel_gbps", gb);
  tier.writeback_bandwidth_per_channel = gb * GBps;
  s.integer("channels", tier.channels);
  s.size("capacity", tier.capacity_bytes);
  s.finish();
  return tier;
}

void read_workload(Section& s, const std::filesystem::path& base_dir, WorkloadSpec& w)
{
  if (s.has("kind")) {
    const auto k = s.text("kind");
    try {
      w.kind = parse_workload_kind(k);
    } catch (const SpecError& e) {
      s.bad("kind", e.what());
    }
  }
  s.size("buffer", w.buffer_bytes);
  s.integer("workers", w.workers);
  s.integer("epochs", w.epochs);
  s.integer("seed", w.seed);
  s.real("zipf_s", w.zipf_s);
  s.integer("phase_length", w.phase_length);
  s.real("hot_fraction", w.hot_fraction);
  s.integer("events_per_epoch", w.events_per_epoch);
  s.real("hot_access_share", w.hot_access_share);
  s.real("write_share", w.write_share);
  s.real("compute_ns_per_event", w.compute_ns_per_event);
  if (s.has("trace"))
    w.trace_path = resolve_path(base_dir, s.text("trace"));
  s.finish();
}

void reject_unknown_sections(const ptree& root, std::initializer_list<std::string_view> known, const std::string& what)
{
  for (const auto& [name, child] : root)
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ConfigError(fmt::format("{}: unknown section [{}]", what, name));
}
} // namespace

std::uint64_t parse_size(std::string_view text)
{
  auto s = trim(text);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p == s.data())
    throw ConfigError(fmt::format("malformed size '{}'", text));
  const auto unit = trim(std::string_view(p, static_cast<std::size_t>(s.data() + s.size() - p)));
  std::uint64_t scale = 0;
  if (unit.empty() || unit == "B")
    scale = 1;
  else if (unit == "KiB" || unit == "K")
    scale = KiB;
  else if (unit == "MiB" || unit == "M")
    scale = MiB;
  else if (unit == "GiB" || unit == "G")
    scale = GiB;
  else
    throw ConfigError(fmt::format("unknown size unit '{}' in '{}'", unit, text));
  if (v > std::numeric_limits<std::uint64_t>::max() / scale)
    throw ConfigError(fmt::format("size '{}' overflows", text));
  return v * scale;
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir)
{
  const auto root = read_ini(in, "run config");
  reject_unknown_sections(root, {"run", "fast_tier", "slow_tier", "cache", "mapping", "policy", "monitor", "workload"},
                          "run config");
  RunConfig c;

  auto work = section(root, "workload");
  read_workload(work, base_dir, c.workload);

  auto run = section(root, "run");
  if (run.has("label"))
    c.label = run.text("label");
  run.boolean("closed_loop", c.closed_loop);
  c.epochs = c.closed_loop ? 1000000 : c.workload.epochs;
  run.integer("epochs", c.epochs);
  run.finish();

  auto fast = section(root, "fast_tier");
  c.tiers[index_of(Tier::fast)] = read_tier(fast, base_dir, c.tier(Tier::fast));
  auto slow = section(root, "slow_tier");
  c.tiers[index_of(Tier::slow)] = read_tier(slow, base_dir, c.tier(Tier::slow));

  auto cache = section(root, "cache");
  cache.size("llc_capacity", c.cache.llc_capacity);
  if (cache.has("associativity") && cache.text("associativity") == "full")
    c.cache.associativity = CacheConfig::fully_associative;
  else
    cache.integer("associativity", c.cache.associativity);
  c.cache.mlp = default_mlp(c.workload.kind);
  cache.real("mlp", c.cache.mlp);
  cache.finish();

  auto mapping = section(root, "mapping");
  mapping.size("ram", c.ram_bytes);
  mapping.real("fast_ratio", c.fast_ratio);
  mapping.finish();

  auto policy = section(root, "policy");
  if (policy.has("kind")) {
    const auto k = policy.text("kind");
    try {
      c.policy.kind = parse_policy(k);
    } catch (const SpecError& e) {
      policy.bad("kind", e.what());
    }
  }
  policy.integer("max_pairs", c.policy.max_pairs);
  policy.real("interval_s", c.policy.interval_s);
  policy.real("hysteresis_margin", c.policy.hysteresis_margin);
  policy.finish();

  auto monitor = section(root, "monitor");
  monitor.real("write_weight", c.heat.write_weight);
  monitor.real("decay_alpha", c.heat.decay_alpha);
  monitor.boolean("sampled", c.heat.sampled);
  monitor.integer("scan_count", c.heat.scan_count);
  monitor.finish();

  try {
    c.validate();
  } catch (const SpecError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  try {
    return parse_run_config(in, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

WorkloadSpec load_workload_spec(const std::filesystem::path& path)
{
  const auto root = read_ini_file(path);
  reject_unknown_sections(root, {"workload"}, path.string());
  WorkloadSpec w;
  auto s = section(root, "workload");
  read_workload(s, path.parent_path(), w);
  try {
    w.validate();
  } catch (const SpecError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return w;
}

DeviceTier load_tier_file(const std::filesystem::path& path)
{
  const auto root = read_ini_file(path);
  reject_unknown_sections(root, {"tier"}, path.string());
  auto s = section(root, "tier");
  if (s.has("file"))
    s.bad("file", "tier files cannot include other tier files");
  auto tier = read_tier(s, path.parent_path(), DeviceTier{});
  try {
    tier.validate();
  } catch (const SpecError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return tier;
}

} // namespace hmsim
