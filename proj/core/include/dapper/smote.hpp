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
#include <span>

#include "dapper/dataset.hpp"

namespace dapper {

struct SmoteParams {
  int k = 5;      // neighbors, [1, 20]
  int m = 100;    // synthetic rows to create, [50, 500]
  int r = 2;      // Minkowski power, [1, 6]
  std::uint64_t seed = 0;
  // When set, m is clipped so the minority never outnumbers the majority.
  bool cap_at_balance = true;

  void validate() const;
};

// (sum_i |a_i - b_i|^r)^(1/r).
double minkowski_distance(std::span<const double> a, std::span<const double> b, int r);

// Number of synthetic rows smote() will append for `ds`.
std::size_t smote_count(const Dataset& ds, const SmoteParams& params);

// Appends synthetic minority rows after the unchanged input rows. Each one
// interpolates between a uniformly drawn minority row and one of its k nearest
// minority neighbors under the Minkowski-r distance.
Dataset smote(const Dataset& ds, const SmoteParams& params);

}  // namespace dapper
