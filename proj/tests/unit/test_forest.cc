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

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "dapper/error.hpp"
#include "dapper/forest.hpp"
#include "helpers.hpp"

namespace dapper {
namespace {

using testing::make_dataset;

Dataset blobs(std::size_t n, std::size_t d, double sep, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> rows;
  std::vector<Label> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const Label y = i % 3 == 0 ? 1 : 0;
    std::vector<double> r(d);
    for (auto& v : r) v = g(rng) + (y ? sep : 0.0);
    rows.push_back(r);
    labels.push_back(y);
  }
  return make_dataset(rows, labels);
}

ForestParams single_tree() {
  ForestParams p;
  p.n_estimators = 1;
  p.bootstrap = false;
  p.max_features = MaxFeatures::kAuto;
  return p;
}

DecisionTree leaf(double c0, double c1) {
  TreeNode n;
  n.count0 = c0;
  n.count1 = c1;
  return DecisionTree({n});
}

double accuracy(const ForestModel& m, const Dataset& ds) {
  const auto pred = predict(m, ds.features);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) ok += pred[i] == ds.labels[i];
  return static_cast<double>(ok) / static_cast<double>(ds.size());
}

TEST(FeaturesPerSplit, Values) {
  EXPECT_EQ(features_per_split(MaxFeatures::kAuto, 12), 4u);
  EXPECT_EQ(features_per_split(MaxFeatures::kSqrt, 12), 4u);
  EXPECT_EQ(features_per_split(MaxFeatures::kLog2, 12), 4u);
  EXPECT_EQ(features_per_split(MaxFeatures::kLog2, 2), 1u);
  EXPECT_EQ(features_per_split(MaxFeatures::kAuto, 2), 2u);
  EXPECT_EQ(features_per_split(MaxFeatures::kLog2, 1), 1u);
  EXPECT_EQ(features_per_split(MaxFeatures::kSqrt, 100), 10u);
}

TEST(FitForest, XorIsMemorized) {
  const Dataset xor4 = make_dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
  ForestParams p = single_tree();
  p.max_depth = 2;
  const ForestModel m = fit_forest(xor4, p, 1);
  // two axis splits: one per feature, every leaf pure
  EXPECT_EQ(accuracy(m, xor4), 1.0);
  EXPECT_EQ(m.trees[0].leaf_count(), 4u);
  EXPECT_EQ(m.trees[0].depth(), 2);
}

TEST(FitForest, SingleClass) {
  const Dataset ds = make_dataset({{0, 1}, {2, 3}, {4, 5}}, {1, 1, 1});
  const ForestModel m = fit_forest(ds, default_forest_params(1), 1);
  const Matrix x(2, 2, std::vector<double>{-9, 9, 100, 0});
  const Matrix proba = predict_proba(m, x);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(proba(i, 1), 1.0);
  EXPECT_EQ(predict(m, x), (std::vector<Label>{1, 1}));
  for (const auto& t : m.trees) EXPECT_EQ(t.nodes().size(), 1u);
}

TEST(FitForest, MemorizesConsistentData) {
  const Dataset ds = blobs(300, 5, 0.5, 3);
  EXPECT_EQ(accuracy(fit_forest(ds, single_tree(), 1), ds), 1.0);
}

TEST(FitForest, Errors) {
  EXPECT_THROW(fit_forest(Dataset{}, default_forest_params(0), 1), ValidationError);
  ForestParams bad = default_forest_params(0);
  bad.min_samples_split = 1;
  EXPECT_THROW(fit_forest(blobs(10, 2, 1, 1), bad, 1), ValidationError);
  Dataset partial = blobs(10, 2, 1, 1);
  partial.labels[0] = kUnlabeled;
  EXPECT_THROW(fit_forest(partial, default_forest_params(0), 1), ValidationError);
  Dataset nodims;
  nodims.features = Matrix(3, 0);
  nodims.labels = {0, 1, 0};
  EXPECT_THROW(fit_forest(nodims, default_forest_params(0), 1), ValidationError);
}

TEST(PredictProba, Averaging) {
  ForestModel m;
  m.dims = 1;
  m.trees = {leaf(0, 3), leaf(0, 1)};
  const Matrix x(1, 1, 0.0);
  EXPECT_EQ(predict_proba(m, x)(0, 0), 0.0);
  EXPECT_EQ(predict_proba(m, x)(0, 1), 1.0);
  EXPECT_EQ(predict(m, x)[0], kPositive);

  m.trees = {leaf(4, 0), leaf(0, 2)};
  EXPECT_EQ(predict_proba(m, x)(0, 1), 0.5);
  EXPECT_EQ(predict(m, x)[0], kNegative);

  m.trees = {leaf(7, 3)};
  EXPECT_DOUBLE_EQ(predict_proba(m, x)(0, 0), 0.7);
  EXPECT_EQ(predict(m, x)[0], kNegative);

  EXPECT_THROW(predict_proba(m, Matrix(1, 2, 0.0)), ValidationError);
}

TEST(PredictProbaProperty, RowsSumToOneAndPredictIsArgmax) {
  const Dataset ds = blobs(200, 4, 1.0, 8);
  const ForestModel m = fit_forest(ds, default_forest_params(4), 1);
  const Dataset probe = blobs(500, 4, 0.5, 99);
  const Matrix proba = predict_proba(m, probe.features);
  const auto pred = predict(m, probe.features);
  for (std::size_t i = 0; i < probe.size(); ++i) {
    ASSERT_NEAR(proba(i, 0) + proba(i, 1), 1.0, 1e-9);
    ASSERT_EQ(pred[i], proba(i, 1) > proba(i, 0) ? 1 : 0);
  }
}

void check_structure(const DecisionTree& tree, const ForestParams& p) {
  const auto& nodes = tree.nodes();
  ASSERT_FALSE(nodes.empty());
  std::size_t leaves = 0;
  std::function<void(int, int)> walk = [&](int id, int depth) {
    const TreeNode& n = nodes[static_cast<std::size_t>(id)];
    ASSERT_EQ(n.depth, depth);
    if (p.max_depth) ASSERT_LE(depth, *p.max_depth);
    if (n.is_leaf()) {
      ++leaves;
      ASSERT_GE(n.count0 + n.count1, p.min_samples_leaf);
      return;
    }
    ASSERT_GE(n.count0 + n.count1, p.min_samples_split);
    const TreeNode& l = nodes[static_cast<std::size_t>(n.left)];
    const TreeNode& r = nodes[static_cast<std::size_t>(n.right)];
    ASSERT_EQ(l.count0 + r.count0, n.count0);
    ASSERT_EQ(l.count1 + r.count1, n.count1);
    walk(n.left, depth + 1);
    walk(n.right, depth + 1);
  };
  walk(0, 0);
  ASSERT_EQ(leaves, tree.leaf_count());
  if (p.max_leaf_nodes) ASSERT_LE(leaves, static_cast<std::size_t>(*p.max_leaf_nodes));
}

TEST(FitForestProperty, StructuralConstraints) {
  std::mt19937_64 rng(12);
  const Dataset ds = blobs(400, 6, 1.0, 1);
  for (int rep = 0; rep < 30; ++rep) {
    ForestParams p;
    p.n_estimators = 3;
    p.min_samples_leaf = 1 + static_cast<int>(rng() % 25);
    p.min_samples_split = 2 + static_cast<int>(rng() % 24);
    p.max_leaf_nodes = 2 + static_cast<int>(rng() % 99);
    p.max_depth = 1 + static_cast<int>(rng() % 25);
    p.max_features = static_cast<MaxFeatures>(rng() % 3);
    p.bootstrap = rng() % 2;
    p.seed = rng();
    for (const auto& t : fit_forest(ds, p, 1).trees) check_structure(t, p);
  }
}

TEST(FitForestProperty, ThreadCountDoesNotMatter) {
  const Dataset ds = blobs(300, 5, 1.0, 2);
  ForestParams p = default_forest_params(17);
  p.n_estimators = 20;
  const ForestModel a = fit_forest(ds, p, 1);
  EXPECT_EQ(a, fit_forest(ds, p, 4));
  EXPECT_EQ(a, fit_forest(ds, p, 1));
}

TEST(FitForestProperty, MoreTreesOnlyAppend) {
  const Dataset ds = blobs(300, 5, 1.0, 2);
  ForestParams p = default_forest_params(5);
  p.n_estimators = 8;
  const ForestModel small = fit_forest(ds, p, 1);
  p.n_estimators = 20;
  const ForestModel large = fit_forest(ds, p, 2);
  for (std::size_t t = 0; t < small.trees.size(); ++t) EXPECT_EQ(small.trees[t], large.trees[t]);
  ForestModel prefix = large;
  prefix.trees.resize(8);
  EXPECT_EQ(predict_proba(prefix, ds.features), predict_proba(small, ds.features));
}

TEST(FitForest, SeparableBlobsHaveHighAccuracy) {
  const Dataset train = blobs(600, 4, 4.0, 1);
  const Dataset test = blobs(600, 4, 4.0, 2);
  EXPECT_GT(accuracy(fit_forest(train, default_forest_params(1), 1), test), 0.97);
}

TEST(ModelJson, RoundTrip) {
  const Dataset ds = blobs(120, 3, 1.0, 6);
  ForestParams p = default_forest_params(3);
  p.n_estimators = 5;
  p.max_depth = 4;
  p.max_features = MaxFeatures::kLog2;
  const ForestModel m = fit_forest(ds, p, 1);
  const ForestModel back = model_from_json(model_to_json(m));
  EXPECT_EQ(back, m);
  EXPECT_EQ(predict_proba(back, ds.features), predict_proba(m, ds.features));

  testing::TempDir dir;
  save_model(m, dir / "model.json");
  EXPECT_EQ(load_model(dir / "model.json"), m);
  EXPECT_THROW(model_from_json("{\"format\": \"nope\"}"), ValidationError);
  EXPECT_THROW(model_from_json("not json"), ValidationError);
}

TEST(MaxFeatures, ParseAndPrint) {
  for (auto mf : {MaxFeatures::kAuto, MaxFeatures::kSqrt, MaxFeatures::kLog2}) {
    EXPECT_EQ(parse_max_features(to_string(mf)), mf);
  }
  EXPECT_THROW(parse_max_features("all"), ValidationError);
}

}  // namespace
}  // namespace dapper
