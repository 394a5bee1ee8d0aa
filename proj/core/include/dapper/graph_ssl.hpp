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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dapper/dataset.hpp"
#include "dapper/matrix.hpp"

namespace dapper {

enum class Kernel { kRbf, kKnn };

std::string to_string(Kernel kernel);
Kernel parse_kernel(const std::string& text);

struct KernelParams {
  Kernel kernel = Kernel::kRbf;
  double gamma = 20.0;   // rbf only
  int n_neighbors = 7;   // knn only
};

// Compressed sparse row matrix. Column indices are ascending within a row.
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  std::size_t nonzeros() const { return col.size(); }
  std::span<const std::uint32_t> row_cols(std::size_t i) const {
    return {col.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
  }
  std::span<const double> row_vals(std::size_t i) const {
    return {val.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
  }
  double row_sum(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;
  Matrix to_dense() const;
};

// Pairwise affinity weights W. rbf graphs are symmetric with a unit diagonal;
// knn graphs are directed (row i lists the neighbors of i) without self loops.
struct AffinityGraph {
  SparseMatrix weights;
  KernelParams kernel;
};

// Every row's other points sorted by (squared Euclidean distance, index).
// Building it is O(n^2 log n); it is reused for every kernel setting tried
// on the same feature matrix.
class NeighborIndex {
 public:
  explicit NeighborIndex(const Matrix& points);

  std::size_t size() const { return n_; }
  const Matrix& points() const { return points_; }
  // Neighbors of row i, nearest first, self excluded.
  std::span<const std::uint32_t> neighbors(std::size_t i) const {
    return {order_.data() + i * (n_ - 1), n_ - 1};
  }

 private:
  Matrix points_;
  std::size_t n_;
  std::vector<std::uint32_t> order_;
};

// Per row, rbf weights smaller than this fraction of the row's largest
// off-diagonal weight are dropped (the rest of the row is kept, and the
// result is symmetrized by union). Zero keeps every representable weight.
inline constexpr double kDefaultRbfPrune = 1e-12;

// W_ij = exp(-gamma * |x_i - x_j|^2).
AffinityGraph rbf_affinity(const Matrix& points, double gamma, double prune = kDefaultRbfPrune);
AffinityGraph rbf_affinity(const NeighborIndex& index, double gamma,
                           double prune = kDefaultRbfPrune);

// W_ij = 1 when j is one of the n_neighbors nearest points to i (self
// excluded, distance ties to the lower index).
AffinityGraph knn_affinity(const Matrix& points, int n_neighbors);
AffinityGraph knn_affinity(const NeighborIndex& index, int n_neighbors);

AffinityGraph build_affinity(const NeighborIndex& index, const KernelParams& kernel);

// T_ij = W_ij / sum_k W_ik. Throws IsolatedNodeError on a zero-sum row.
SparseMatrix transition_matrix(const AffinityGraph& graph);

// W' = max(W, W^T) without self loops, then S = D^-1/2 W' D^-1/2. Rows of
// nodes with zero degree are empty.
SparseMatrix normalized_affinity(const AffinityGraph& graph);

struct SslParams {
  KernelParams kernel;
  int max_iter = 1000;
  double alpha = 0.2;        // label spreading only
  double tolerance = 1e-3;   // on the max absolute change of any score
};

SslParams default_propagation_params();
SslParams default_spreading_params();

// Class scores per row. After finalization every row sums to one.
struct LabelDistribution {
  Matrix scores;  // n x 2
  bool converged = false;
  int iterations = 0;
};

struct SslResult {
  Dataset dataset;  // same rows, every label in {0, 1}
  LabelDistribution distribution;
};

// Hard-clamped propagation over the row-stochastic transition matrix.
// Unlabeled score rows are renormalized after each sweep.
SslResult label_propagation(const Dataset& ds, const SslParams& params);
SslResult label_propagation(const Dataset& ds, const SslParams& params,
                            const NeighborIndex& index);

// Soft-clamped diffusion F <- alpha * S * F + (1 - alpha) * Y.
SslResult label_spreading(const Dataset& ds, const SslParams& params);
SslResult label_spreading(const Dataset& ds, const SslParams& params,
                          const NeighborIndex& index);

enum class Learner { kPropagation, kSpreading };

std::string to_string(Learner learner);
Learner parse_learner(const std::string& text);

SslResult pseudo_label(Learner learner, const Dataset& ds, const SslParams& params,
                       const NeighborIndex& index);

// Columns: row, score_0, score_1, label.
void write_label_distribution_csv(const SslResult& result, const std::filesystem::path& path);

}  // namespace dapper
