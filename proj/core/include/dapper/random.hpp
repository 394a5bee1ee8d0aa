// Copyright 2026 The Dapper Authors
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

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dapper {

using Rng = std::mt19937_64;

// Mixes a base seed with a stream tag and an index into an independent seed.
// Every randomized component derives its stream this way, so results never
// depend on the order in which components run.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t base, std::string_view tag,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(base, tag, index));
}

// Uniform double on [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer on [0, n) for n > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Standard normal draw (Box-Muller, two uniforms per call).
double standard_normal(Rng& rng);

}  // namespace dapper
