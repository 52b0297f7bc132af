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

#ifndef HMSIM_COMMON_H
#define HMSIM_COMMON_H

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hmsim
{
inline constexpr std::uint64_t cacheline_size = 64;
inline constexpr std::uint64_t page_size = 4096;
inline constexpr std::uint64_t lines_per_page = page_size / cacheline_size;

inline constexpr std::uint64_t KiB = 1024;
inline constexpr std::uint64_t MiB = 1024 * KiB;
inline constexpr std::uint64_t GiB = 1024 * MiB;

// Device bandwidths are quoted in decimal units.
inline constexpr double GBps = 1e9;

using PageIndex = std::uint64_t;

// The two device classes making up a guest's RAM.
enum class Tier : std::uint8_t { fast = 0, slow = 1 };
inline constexpr std::size_t tier_count = 2;
inline constexpr std::array<Tier, tier_count> all_tiers{Tier::fast, Tier::slow};

constexpr std::size_t index_of(Tier t) noexcept { return static_cast<std::size_t>(t); }
constexpr Tier other(Tier t) noexcept { return t == Tier::fast ? Tier::slow : Tier::fast; }
std::string_view to_string(Tier t) noexcept;
Tier parse_tier(std::string_view name);

enum class AccessOp : std::uint8_t { read = 0, write = 1 };

struct AccessEvent {
  AccessOp op = AccessOp::read;
  std::uint64_t address = 0;
  std::uint16_t worker = 0;

  friend bool operator==(const AccessEvent&, const AccessEvent&) = default;
};

constexpr std::uint64_t line_of(std::uint64_t address) noexcept { return address / cacheline_size; }
constexpr PageIndex page_of(std::uint64_t address) noexcept { return address / page_size; }

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// An address or page index outside the configured guest RAM.
class AddressRangeError : public Error
{
public:
  using Error::Error;
};

// Not enough frames on a tier for the requested placement.
class CapacityError : public Error
{
public:
  using Error::Error;
};

// A swap plan that would break the mapping bijection.
class PlanError : public Error
{
public:
  using Error::Error;
};

// Invalid workload, tier, cache or policy parameters.
class SpecError : public Error
{
public:
  using Error::Error;
};

class TraceFormatError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

} // namespace hmsim

#endif
