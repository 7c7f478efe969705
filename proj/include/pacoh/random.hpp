// Copyright 2026 The pacoh-rl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PACOH_RANDOM_HPP_
#define PACOH_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>

#include "pacoh/types.hpp"

namespace pacoh {

using Rng = std::mt19937_64;

// Derives an independent generator for a named call site. Streams with
// different names (or indices) never share state, so reconfiguring one
// consumer leaves every other stream untouched.
Rng child_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

// A 64-bit seed for APIs that take a seed rather than a generator.
std::uint64_t child_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

// Matrix of i.i.d. standard normal draws, filled column-major.
Matrix standard_normal(Index rows, Index cols, Rng& rng);

}  // namespace pacoh

#endif  // PACOH_RANDOM_HPP_
