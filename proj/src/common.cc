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

#include "hmsim/common.h"

#include <fmt/core.h>

namespace hmsim
{
std::string_view to_string(Tier t) noexcept { return t == Tier::fast ? "fast" : "slow"; }

Tier parse_tier(std::string_view name)
{
  if (name == "fast")
    return Tier::fast;
  if (name == "slow")
    return Tier::slow;
  throw SpecError(fmt::format("unknown tier '{}'", name));
}
} // namespace hmsim
