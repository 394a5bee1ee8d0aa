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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dapper/dataset.hpp"
#include "dapper/matrix.hpp"

namespace dapper {

enum class MaxFeatures { kAuto, kSqrt, kLog2 };

std::string to_string(MaxFeatures mf);
MaxFeatures parse_max_features(const std::string& text);

// Features examined per split: ceil(sqrt(d)) for auto/sqrt, ceil(log2(d)) for
// log2, at least one and at most d.
std::size_t features_per_split(MaxFeatures mf, std::size_t d);

struct ForestParams {
  int n_estimators = 100;
  int min_samples_leaf = 1;
  int min_samples_split = 2;
  std::optional<int> max_leaf_nodes;  // unbounded when empty
  std::optional<int> max_depth;       // unbounded when empty
  MaxFeatures max_features = MaxFeatures::kAuto;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const ForestParams&) const = default;
};

// The untuned classifier: 100 bootstrapped trees, sqrt features, no limits.
ForestParams default_forest_params(std::uint64_t seed);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;     // taken when x[feature] <= threshold
  int right = -1;
  int depth = 0;
  double count0 = 0.0;  // training rows of each class that reached the node
  double count1 = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& leaf_for(std::span<const double> x) const;
  // Probability of class 1 at the leaf reached by x.
  double positive_fraction(std::span<const double> x) const;

  std::size_t leaf_count() const;
  int depth() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct ForestModel {
  ForestParams params;
  std::size_t dims = 0;
  std::vector<DecisionTree> trees;

  bool operator==(const ForestModel&) const = default;
};

// Fits params.n_estimators trees. Tree t draws from its own random stream
// derived from (params.seed, t), so the result does not depend on `threads`
// and a model with k trees is the prefix of one with more. threads == 0 uses
// the hardware concurrency.
ForestModel fit_forest(const Dataset& ds, const ForestParams& params, unsigned threads = 0);

// m x 2 matrix of mean leaf class frequencies.
Matrix predict_proba(const ForestModel& model, const Matrix& x);
// argmax of predict_proba; ties go to class 0.
std::vector<Label> predict(const ForestModel& model, const Matrix& x);

std::string model_to_json(const ForestModel& model);
ForestModel model_from_json(const std::string& text);
void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace dapper
