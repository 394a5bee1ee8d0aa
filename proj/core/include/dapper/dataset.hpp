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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dapper/matrix.hpp"

namespace dapper {

using Label = int;
inline constexpr Label kUnlabeled = -1;
inline constexpr Label kNegative = 0;
inline constexpr Label kPositive = 1;

// Row id carried by rows that do not come from the source file (SMOTE output).
inline constexpr std::size_t kSyntheticRow = std::numeric_limits<std::size_t>::max();

// Feature matrix plus binary labels; kUnlabeled marks rows whose label is hidden.
//
// `row_ids` records where each row came from in the originally loaded or
// generated dataset so that split provenance can be audited downstream.
struct Dataset {
  Matrix features;
  std::vector<Label> labels;
  std::vector<std::size_t> row_ids;
  std::vector<std::string> feature_names;
  std::optional<std::array<std::string, 2>> class_names;

  std::size_t size() const { return labels.size(); }
  std::size_t dims() const { return features.cols(); }

  std::size_t count(Label label) const;
  std::size_t labeled_count() const { return size() - count(kUnlabeled); }
  bool fully_labeled() const { return count(kUnlabeled) == 0; }

  // Throws ValidationError when shapes disagree, a feature is not finite or a
  // label is outside {-1, 0, 1}.
  void validate() const;

  // Subset by row index, preserving the given order.
  Dataset select(const std::vector<std::size_t>& indices) const;
};

// Appends rows of `b` to a copy of `a`. Column counts must match.
Dataset concatenate(const Dataset& a, const Dataset& b);

struct SplitSpec {
  double train_frac = 0.64;
  double val_frac = 0.16;
  double test_frac = 0.20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabelRate {
  double rate = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DatasetSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Reads a comma-separated file with a header row. `positive_label` maps to 1,
// every other label value to 0.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::string& positive_label);

// Writes features and a trailing `label` column; the inverse of load_csv with
// positive_label "1".
void write_csv(const Dataset& ds, const std::filesystem::path& path);

// Stratified three-way split. Test size is ceil(test_frac * n), validation
// size ceil(val_frac / (train_frac + val_frac) * remaining), the rest is train;
// per-class counts within each stage use largest-remainder rounding. Rows keep
// their original relative order inside each part.
DatasetSplits stratified_split(const Dataset& ds, const SplitSpec& spec);

// Number of rows that stay labeled at `rate` out of `n`.
std::size_t labeled_target(std::size_t n, double rate);

// Hides labels so that labeled_target(n, rate) rows remain labeled, drawn
// stratified per class with at least one labeled row per present class.
Dataset mask_labels(const Dataset& train, const LabelRate& rate);

// Two isotropic unit-variance Gaussian clusters in `d` dimensions whose means
// are `separation` apart. Class 1 is the minority with round(minority_frac * n)
// rows. Rows are shuffled.
Dataset synth_generate(std::size_t n, std::size_t d, double minority_frac,
                       double separation, std::uint64_t seed);

// min(count0, count1) / (count0 + count1) over labeled rows.
double minority_fraction(const Dataset& ds);

// The class with fewer labeled rows (ties resolve to class 1).
Label minority_label(const Dataset& ds);

}  // namespace dapper
