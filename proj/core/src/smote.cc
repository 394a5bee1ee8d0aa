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

#include "dapper/smote.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dapper/error.hpp"
#include "dapper/random.hpp"

namespace dapper {

void SmoteParams::validate() const {
  if (k < 1) throw ValidationError("smote k must be at least 1");
  if (m < 0) throw ValidationError("smote m must be non-negative");
  if (r < 1) throw ValidationError("smote r must be at least 1");
}

double minkowski_distance(std::span<const double> a, std::span<const double> b, int r) {
  if (a.size() != b.size()) {
    throw ValidationError("minkowski_distance: dimension mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
  if (r < 1) throw ValidationError("minkowski power must be at least 1");
  double sum = 0.0;
  if (r == 1) {
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum;
  }
  if (r == 2) {
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sum);
  }
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::pow(std::abs(a[i] - b[i]), r);
  return std::pow(sum, 1.0 / r);
}

std::size_t smote_count(const Dataset& ds, const SmoteParams& params) {
  const std::size_t c0 = ds.count(kNegative);
  const std::size_t c1 = ds.count(kPositive);
  const std::size_t minority = std::min(c0, c1);
  const std::size_t majority = std::max(c0, c1);
  const auto m = static_cast<std::size_t>(params.m);
  return params.cap_at_balance ? std::min(m, majority - minority) : m;
}

Dataset smote(const Dataset& ds, const SmoteParams& params) {
  params.validate();
  if (!ds.fully_labeled()) throw ValidationError("smote needs a fully labeled dataset");
  if (ds.count(kNegative) == 0 || ds.count(kPositive) == 0) {
    throw ValidationError("smote needs both classes present");
  }
  const std::size_t count = smote_count(ds, params);
  Dataset out = ds;
  if (out.row_ids.empty()) {
    out.row_ids.resize(ds.size());
    std::iota(out.row_ids.begin(), out.row_ids.end(), std::size_t{0});
  }
  if (count == 0) return out;

  const Label minority = minority_label(ds);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] == minority) rows.push_back(i);
  }
  const std::size_t n_min = rows.size();
  const std::size_t k =
      n_min == 1 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(params.k), n_min - 1);

  // neighbors[a * k + q] is the q-th nearest minority row (by position in
  // `rows`) of minority row a; ties go to the lower position.
  std::vector<std::size_t> neighbors(n_min * k);
  std::vector<double> dist(n_min);
  std::vector<std::size_t> order;
  for (std::size_t a = 0; a < n_min; ++a) {
    if (n_min == 1) {
      neighbors[0] = 0;
      break;
    }
    order.clear();
    for (std::size_t b = 0; b < n_min; ++b) {
      if (b == a) continue;
      dist[b] = minkowski_distance(ds.features.row(rows[a]), ds.features.row(rows[b]), params.r);
      order.push_back(b);
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t x, std::size_t y) {
                        return dist[x] != dist[y] ? dist[x] < dist[y] : x < y;
                      });
    std::copy_n(order.begin(), k, neighbors.begin() + static_cast<std::ptrdiff_t>(a * k));
  }

  Rng rng = make_rng(params.seed, "smote");
  const std::size_t d = ds.dims();
  std::vector<double> synthetic(d);
  out.features.reserve_rows(ds.size() + count);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t a = uniform_index(rng, n_min);
    const std::size_t b = neighbors[a * k + uniform_index(rng, k)];
    const double lambda = uniform01(rng);
    const auto base = ds.features.row(rows[a]);
    const auto nn = ds.features.row(rows[b]);
    for (std::size_t j = 0; j < d; ++j) synthetic[j] = base[j] + lambda * (nn[j] - base[j]);
    out.features.append_row(synthetic);
    out.labels.push_back(minority);
    out.row_ids.push_back(kSyntheticRow);
  }
  return out;
}

}  // namespace dapper
