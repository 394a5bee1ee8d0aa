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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "dapper/error.hpp"
#include "dapper/graph_ssl.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

namespace dapper {
namespace {

using testing::make_dataset;

SslParams tight(SslParams p, double gamma) {
  p.kernel = {Kernel::kRbf, gamma, 7};
  p.max_iter = 1500;
  p.tolerance = 1e-7;
  return p;
}

Eigen::MatrixXd row_normalized(Eigen::MatrixXd f) {
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const double s = f.row(i).sum();
    if (s > 0) f.row(i) /= s;
  }
  return f;
}

double max_error(const Matrix& got, const Eigen::MatrixXd& want) {
  return (testing::to_eigen(got) - want).cwiseAbs().maxCoeff();
}

TEST(RbfAffinity, Weights) {
  const Matrix x(3, 1, std::vector<double>{0.0, 0.0, std::sqrt(0.1)});
  const AffinityGraph g = rbf_affinity(x, 20.0);
  EXPECT_DOUBLE_EQ(g.weights.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.weights.at(0, 0), 1.0);
  EXPECT_NEAR(g.weights.at(0, 2), 0.1353352832366127, 1e-12);
  EXPECT_NEAR(g.weights.at(2, 0), std::exp(-2.0), 1e-15);
}

TEST(RbfAffinity, SymmetricAndDecreasingInGamma) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  Matrix x(12, 3);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = u(rng);
  }
  const Matrix lo = rbf_affinity(x, 10.0, 0.0).weights.to_dense();
  const Matrix hi = rbf_affinity(x, 12.0, 0.0).weights.to_dense();
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(lo(i, i), 1.0);
    for (std::size_t j = 0; j < 12; ++j) {
      EXPECT_EQ(lo(i, j), lo(j, i));
      if (i != j) EXPECT_LT(hi(i, j), lo(i, j));
    }
  }
  EXPECT_THROW(rbf_affinity(x, 0.0), ValidationError);
}

TEST(KnnAffinity, Examples) {
  const Matrix line(3, 1, std::vector<double>{0.0, 1.0, 3.0});
  const AffinityGraph g = knn_affinity(line, 1);
  EXPECT_EQ(g.weights.row_cols(1).size(), 1u);
  EXPECT_EQ(g.weights.row_cols(1)[0], 0u);

  const Matrix tie(3, 1, std::vector<double>{0.0, 1.0, 2.0});
  EXPECT_EQ(knn_affinity(tie, 1).weights.row_cols(1)[0], 0u);

  const Matrix full = knn_affinity(tie, 5).weights.to_dense();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(full(i, j), i == j ? 0.0 : 1.0);
  }
}

TEST(KnnAffinity, RowCounts) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Matrix x(20, 2);
  for (std::size_t i = 0; i < 20; ++i) x(i, 0) = g(rng), x(i, 1) = g(rng);
  for (int k : {1, 5, 19, 40}) {
    const auto w = knn_affinity(x, k).weights;
    for (std::size_t i = 0; i < 20; ++i) {
      EXPECT_EQ(w.row_cols(i).size(), std::min<std::size_t>(k, 19));
      EXPECT_EQ(w.at(i, i), 0.0);
    }
  }
  EXPECT_THROW(knn_affinity(x, 0), ValidationError);
}

TEST(TransitionMatrix, Examples) {
  AffinityGraph uniform;
  uniform.weights = SparseMatrix{4, {0, 4, 8, 12, 16}, {0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3},
                                 std::vector<double>(16, 1.0)};
  const Matrix t = transition_matrix(uniform).to_dense();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(t(i, j), 0.25);
  }

  AffinityGraph row;
  row.weights = SparseMatrix{1, {0, 3}, {0, 1, 2}, {2.0, 1.0, 1.0}};
  const auto r = transition_matrix(row);
  EXPECT_DOUBLE_EQ(r.val[0], 0.5);
  EXPECT_DOUBLE_EQ(r.val[1], 0.25);
  EXPECT_DOUBLE_EQ(r.val[2], 0.25);
}

TEST(TransitionMatrix, IsolatedNodeCarriesIndex) {
  AffinityGraph g;
  g.weights = SparseMatrix{3, {0, 1, 1, 2}, {1, 0}, {1.0, 1.0}};
  try {
    transition_matrix(g);
    FAIL() << "expected IsolatedNodeError";
  } catch (const IsolatedNodeError& e) {
    EXPECT_EQ(e.node(), 1u);
  }
}

TEST(TransitionMatrixProperty, RowsSumToOne) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    auto inst = testing::random_ssl_instance(rng, 1.0);
    for (const auto& g : {rbf_affinity(inst.ds.features, inst.gamma),
                          knn_affinity(inst.ds.features, 1 + static_cast<int>(rng() % 15))}) {
      const auto t = transition_matrix(g);
      for (std::size_t i = 0; i < t.n; ++i) ASSERT_LT(std::abs(t.row_sum(i) - 1.0), 1e-12);
    }
  }
}

TEST(LabelPropagation, ThreePointLineTiesToClassZero) {
  const Dataset ds = make_dataset({{0.0}, {1.0}, {2.0}}, {0, kUnlabeled, 1});
  for (double gamma : {0.5, 20.0}) {
    SslParams p = default_propagation_params();
    p.kernel.gamma = gamma;
    const SslResult r = label_propagation(ds, p);
    EXPECT_NEAR(r.distribution.scores(1, 0), 0.5, 1e-12);
    EXPECT_NEAR(r.distribution.scores(1, 1), 0.5, 1e-12);
    EXPECT_EQ(r.dataset.labels[1], kNegative);
  }
}

TEST(LabelPropagation, FiveChainMatchesHarmonicSolve) {
  const Dataset ds = make_dataset({{0.0}, {0.2}, {0.4}, {0.6}, {0.8}},
                                  {0, kUnlabeled, kUnlabeled, kUnlabeled, 1});
  SslParams p = default_propagation_params();
  p.max_iter = 1500;
  const SslResult r = label_propagation(ds, p);
  const Eigen::MatrixXd want = testing::harmonic_solution(ds, p.kernel.gamma);
  EXPECT_LT(max_error(r.distribution.scores, want), 1e-3);
  EXPECT_TRUE(r.distribution.converged);
  // the middle point is an exact tie
  EXPECT_NEAR(r.distribution.scores(2, 1), 0.5, 1e-3);
  for (std::size_t i : {0, 1}) EXPECT_EQ(r.dataset.labels[i], kNegative);
  for (std::size_t i : {3, 4}) EXPECT_EQ(r.dataset.labels[i], kPositive);
}

TEST(LabelPropagation, DuplicatesOfLabeledPoint) {
  const Dataset ds = make_dataset({{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {5.0, 5.0}},
                                  {1, kUnlabeled, kUnlabeled, 0});
  for (Learner l : {Learner::kPropagation, Learner::kSpreading}) {
    const auto r = pseudo_label(l, ds, l == Learner::kPropagation ? default_propagation_params()
                                                                  : default_spreading_params(),
                                NeighborIndex(ds.features));
    EXPECT_EQ(r.dataset.labels[1], kPositive);
    EXPECT_EQ(r.dataset.labels[2], kPositive);
  }
}

TEST(LabelPropagation, Errors) {
  const Dataset single = make_dataset({{0.0}, {1.0}, {2.0}}, {0, kUnlabeled, 0});
  EXPECT_THROW(label_propagation(single, default_propagation_params()), ValidationError);
  EXPECT_THROW(label_spreading(single, default_spreading_params()), ValidationError);
  const Dataset ok = make_dataset({{0.0}, {1.0}, {2.0}}, {0, kUnlabeled, 1});
  SslParams p = default_spreading_params();
  p.alpha = 1.0;
  EXPECT_THROW(label_spreading(ok, p), ValidationError);
}

TEST(LabelPropagationProperty, MatchesHarmonicOnCompactInstances) {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 50; ++rep) {
    const auto inst = testing::random_ssl_instance(rng, 0.5);
    const auto r = label_propagation(inst.ds, tight(default_propagation_params(), inst.gamma));
    ASSERT_LT(max_error(r.distribution.scores, testing::harmonic_solution(inst.ds, inst.gamma)), 1e-3)
        << "instance " << rep;
  }
}

TEST(LabelSpreading, MatchesClosedFormFixedPoint) {
  std::mt19937_64 rng(202);
  for (int rep = 0; rep < 50; ++rep) {
    const auto inst = testing::random_ssl_instance(rng, 0.5);
    SslParams p = tight(default_spreading_params(), inst.gamma);
    p.alpha = inst.alpha;
    const auto r = label_spreading(inst.ds, p);
    const auto want =
        row_normalized(testing::spreading_fixed_point(inst.ds, inst.gamma, inst.alpha));
    ASSERT_LT(max_error(r.distribution.scores, want), 1e-3) << "instance " << rep;
  }
}

TEST(LabelSpreading, SmallAlphaIsDominatedByClamping) {
  std::mt19937_64 rng(7);
  const auto inst = testing::random_ssl_instance(rng, 0.5);
  SslParams p = default_spreading_params();
  p.alpha = 0.01;
  const auto r = label_spreading(inst.ds, p);
  for (std::size_t i = 0; i < inst.ds.size(); ++i) {
    if (inst.ds.labels[i] == kUnlabeled) continue;
    const Label argmax = r.distribution.scores(i, 1) > r.distribution.scores(i, 0) ? 1 : 0;
    EXPECT_EQ(argmax, inst.ds.labels[i]);
    EXPECT_GT(r.distribution.scores(i, inst.ds.labels[i]), 0.95);
  }
}

TEST(LabelSpreading, SymmetricLine) {
  const Dataset ds = make_dataset({{0.0}, {0.1}, {0.2}}, {0, kUnlabeled, 1});
  const auto r = label_spreading(ds, default_spreading_params());
  EXPECT_NEAR(r.distribution.scores(1, 0), r.distribution.scores(1, 1), 1e-12);
}

TEST(LabelSpreading, UnreachableRowFallsBackToMajority) {
  SslParams p = default_spreading_params();
  p.kernel = {Kernel::kKnn, 20.0, 1};
  // the point at 50 only links to 40, which links back to it; neither touches a label
  const Dataset ds = make_dataset({{0.0}, {0.1}, {0.3}, {40.0}, {50.0}},
                                  {1, 1, 0, kUnlabeled, kUnlabeled});
  const auto r = label_spreading(ds, p);
  EXPECT_EQ(r.dataset.labels[3], kPositive);
  EXPECT_EQ(r.dataset.labels[4], kPositive);
  EXPECT_DOUBLE_EQ(r.distribution.scores(4, 1), 1.0);
}

TEST(SslProperty, LabeledRowsKeptNoUnlabeledLeftRowsSumToOne) {
  std::mt19937_64 rng(303);
  for (int rep = 0; rep < 60; ++rep) {
    const auto inst = testing::random_ssl_instance(rng, 1.0);
    SslParams p = default_spreading_params();
    p.alpha = inst.alpha;
    p.kernel = rep % 2 ? KernelParams{Kernel::kKnn, 0, 1 + static_cast<int>(rng() % 10)}
                       : KernelParams{Kernel::kRbf, inst.gamma, 7};
    for (Learner l : {Learner::kPropagation, Learner::kSpreading}) {
      const auto r = pseudo_label(l, inst.ds, p, NeighborIndex(inst.ds.features));
      ASSERT_EQ(r.dataset.count(kUnlabeled), 0u);
      for (std::size_t i = 0; i < inst.ds.size(); ++i) {
        if (inst.ds.labels[i] != kUnlabeled) ASSERT_EQ(r.dataset.labels[i], inst.ds.labels[i]);
        ASSERT_NEAR(r.distribution.scores(i, 0) + r.distribution.scores(i, 1), 1.0, 1e-12);
      }
      ASSERT_EQ(r.dataset.features, inst.ds.features);
    }
  }
}

TEST(SslProperty, PermutationEquivariance) {
  std::mt19937_64 rng(404);
  for (int rep = 0; rep < 30; ++rep) {
    const auto inst = testing::random_ssl_instance(rng, 0.5);
    std::vector<std::size_t> perm(inst.ds.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const Dataset shuffled = inst.ds.select(perm);
    for (Learner l : {Learner::kPropagation, Learner::kSpreading}) {
      SslParams p = tight(l == Learner::kPropagation ? default_propagation_params()
                                                     : default_spreading_params(),
                          inst.gamma);
      p.alpha = inst.alpha;
      const auto a = pseudo_label(l, inst.ds, p, NeighborIndex(inst.ds.features));
      const auto b = pseudo_label(l, shuffled, p, NeighborIndex(shuffled.features));
      for (std::size_t i = 0; i < perm.size(); ++i) {
        // scores agree to rounding; labels only when the row is not a near tie
        const double margin = std::abs(a.distribution.scores(perm[i], 1) - 0.5);
        ASSERT_NEAR(b.distribution.scores(i, 1), a.distribution.scores(perm[i], 1), 1e-6);
        if (margin > 1e-6) ASSERT_EQ(b.dataset.labels[i], a.dataset.labels[perm[i]]);
      }
    }
  }
}

TEST(SslProperty, KnnTiesPermuteWithRowsWhenDistinct) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> rows;
  std::vector<Label> labels;
  for (int i = 0; i < 30; ++i) {
    rows.push_back({g(rng), g(rng)});
    labels.push_back(i < 3 ? 0 : i < 6 ? 1 : kUnlabeled);
  }
  const Dataset ds = make_dataset(rows, labels);
  std::vector<std::size_t> perm(30);
  std::iota(perm.rbegin(), perm.rend(), std::size_t{0});
  SslParams p = default_propagation_params();
  p.kernel = {Kernel::kKnn, 0, 5};
  const auto a = label_propagation(ds, p);
  const auto b = label_propagation(ds.select(perm), p);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(b.dataset.labels[i], a.dataset.labels[perm[i]]);
}

TEST(LabelDistributionCsv, Columns) {
  testing::TempDir dir;
  const Dataset ds = make_dataset({{0.0}, {1.0}, {2.0}}, {0, kUnlabeled, 1});
  write_label_distribution_csv(label_propagation(ds, default_propagation_params()), dir / "f.csv");
  const std::string text = testing::read_text(dir / "f.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "row,score_0,score_1,label");
  EXPECT_NE(text.find("\n1,0.5,0.5,0\n"), std::string::npos);
}

}  // namespace
}  // namespace dapper
