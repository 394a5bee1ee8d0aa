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

#include "dapper/graph_ssl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dapper/error.hpp"
#include "dapper/io.hpp"

namespace dapper {
namespace {

struct Entry {
  std::uint32_t row;
  std::uint32_t col;
  double value;
};

SparseMatrix from_entries(std::size_t n, std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  m.col.reserve(entries.size());
  m.val.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
      m.val.back() = std::max(m.val.back(), e.value);
      continue;
    }
    m.col.push_back(e.col);
    m.val.push_back(e.value);
    ++m.row_ptr[e.row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

void check_ssl_input(const Dataset& ds, const SslParams& params, bool spreading) {
  ds.validate();
  if (ds.count(kNegative) == 0 || ds.count(kPositive) == 0) {
    throw ValidationError("graph learners need at least one labeled row of each class");
  }
  if (params.max_iter < 1) throw ValidationError("max_iter must be at least 1");
  if (!(params.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  if (spreading && !(params.alpha > 0.0 && params.alpha < 1.0)) {
    throw ValidationError("alpha must lie in (0, 1)");
  }
}

Label labeled_majority(const Dataset& ds) {
  return ds.count(kPositive) > ds.count(kNegative) ? kPositive : kNegative;
}

// Assigns argmax labels (ties to class 0), falls back to the labeled majority
// for rows with no score mass, and normalizes every score row to sum to one.
// Originally labeled rows always report their given label.
SslResult finalize(const Dataset& ds, Matrix scores, bool converged, int iterations) {
  SslResult result;
  result.dataset = ds;
  const Label fallback = labeled_majority(ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double& s0 = scores(i, 0);
    double& s1 = scores(i, 1);
    const double total = s0 + s1;
    Label assigned;
    if (total > 0.0) {
      assigned = s1 > s0 ? kPositive : kNegative;
      s0 /= total;
      s1 /= total;
    } else {
      assigned = fallback;
      s0 = fallback == kNegative ? 1.0 : 0.0;
      s1 = 1.0 - s0;
    }
    if (ds.labels[i] == kUnlabeled) result.dataset.labels[i] = assigned;
  }
  result.distribution = {std::move(scores), converged, iterations};
  return result;
}

Matrix one_hot(const Dataset& ds) {
  Matrix y(ds.size(), 2, 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] != kUnlabeled) y(i, static_cast<std::size_t>(ds.labels[i])) = 1.0;
  }
  return y;
}

SslResult propagate(const Dataset& ds, const SslParams& params, const AffinityGraph& graph) {
  const SparseMatrix t = transition_matrix(graph);
  const std::size_t n = ds.size();
  Matrix f = one_hot(ds);
  Matrix next(n, 2, 0.0);
  int it = 0;
  bool converged = false;
  while (it < params.max_iter) {
    ++it;
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (ds.labels[i] != kUnlabeled) {
        next(i, 0) = f(i, 0);
        next(i, 1) = f(i, 1);
        continue;
      }
      double a = 0.0, b = 0.0;
      const auto cols = t.row_cols(i);
      const auto vals = t.row_vals(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        a += vals[k] * f(cols[k], 0);
        b += vals[k] * f(cols[k], 1);
      }
      const double total = a + b;
      if (total > 0.0) {
        a /= total;
        b /= total;
      }
      next(i, 0) = a;
      next(i, 1) = b;
      delta = std::max({delta, std::abs(a - f(i, 0)), std::abs(b - f(i, 1))});
    }
    std::swap(f, next);
    if (delta < params.tolerance) {
      converged = true;
      break;
    }
  }
  return finalize(ds, std::move(f), converged, it);
}

SslResult spread(const Dataset& ds, const SslParams& params, const AffinityGraph& graph) {
  const SparseMatrix s = normalized_affinity(graph);
  const std::size_t n = ds.size();
  const Matrix y = one_hot(ds);
  Matrix f = y;
  Matrix next(n, 2, 0.0);
  const double alpha = params.alpha;
  int it = 0;
  bool converged = false;
  while (it < params.max_iter) {
    ++it;
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double a = 0.0, b = 0.0;
      const auto cols = s.row_cols(i);
      const auto vals = s.row_vals(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        a += vals[k] * f(cols[k], 0);
        b += vals[k] * f(cols[k], 1);
      }
      a = alpha * a + (1.0 - alpha) * y(i, 0);
      b = alpha * b + (1.0 - alpha) * y(i, 1);
      next(i, 0) = a;
      next(i, 1) = b;
      delta = std::max({delta, std::abs(a - f(i, 0)), std::abs(b - f(i, 1))});
    }
    std::swap(f, next);
    if (delta < params.tolerance) {
      converged = true;
      break;
    }
  }
  return finalize(ds, std::move(f), converged, it);
}

SslResult trivially_labeled(const Dataset& ds) {
  return finalize(ds, one_hot(ds), true, 0);
}

}  // namespace

std::string to_string(Kernel kernel) { return kernel == Kernel::kRbf ? "rbf" : "knn"; }

Kernel parse_kernel(const std::string& text) {
  if (text == "rbf") return Kernel::kRbf;
  if (text == "knn") return Kernel::kKnn;
  throw ValidationError("unknown kernel '" + text + "' (expected rbf or knn)");
}

std::string to_string(Learner learner) {
  return learner == Learner::kPropagation ? "propagation" : "spreading";
}

Learner parse_learner(const std::string& text) {
  if (text == "propagation" || text == "lp") return Learner::kPropagation;
  if (text == "spreading" || text == "ls") return Learner::kSpreading;
  throw ValidationError("unknown learner '" + text + "' (expected propagation or spreading)");
}

double SparseMatrix::row_sum(std::size_t i) const {
  const auto v = row_vals(i);
  return std::accumulate(v.begin(), v.end(), 0.0);
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(j));
  if (it == cols.end() || *it != j) return 0.0;
  return val[row_ptr[i] + static_cast<std::size_t>(it - cols.begin())];
}

Matrix SparseMatrix::to_dense() const {
  Matrix out(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = row_cols(i);
    const auto vals = row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) out(i, cols[k]) = vals[k];
  }
  return out;
}

NeighborIndex::NeighborIndex(const Matrix& points)
    : points_(points), n_(points.rows()) {
  if (n_ < 2) throw ValidationError("a neighbor index needs at least two points");
  order_.resize(n_ * (n_ - 1));
  std::vector<double> dist(n_);
  std::vector<std::uint32_t> idx;
  idx.reserve(n_ - 1);
  for (std::size_t i = 0; i < n_; ++i) {
    idx.clear();
    for (std::size_t j = 0; j < n_; ++j) {
      if (j == i) continue;
      dist[j] = squared_distance(points_.row(i), points_.row(j));
      idx.push_back(static_cast<std::uint32_t>(j));
    }
    std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
      return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
    });
    std::copy(idx.begin(), idx.end(), order_.begin() + static_cast<std::ptrdiff_t>(i * (n_ - 1)));
  }
}

AffinityGraph rbf_affinity(const Matrix& points, double gamma, double prune) {
  if (points.rows() < 2) {
    if (!(gamma > 0.0)) throw ValidationError("rbf gamma must be positive");
    AffinityGraph g;
    g.kernel = {Kernel::kRbf, gamma, 0};
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), 1.0});
    }
    g.weights = from_entries(points.rows(), std::move(entries));
    return g;
  }
  return rbf_affinity(NeighborIndex(points), gamma, prune);
}

AffinityGraph rbf_affinity(const NeighborIndex& index, double gamma, double prune) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("rbf gamma must be positive");
  if (!(prune >= 0.0 && prune < 1.0)) throw ValidationError("rbf prune must lie in [0, 1)");
  const std::size_t n = index.size();
  const Matrix& x = index.points();
  // exp(-gamma * (d2 - d2_min)) >= prune  <=>  d2 <= d2_min - log(prune) / gamma
  const double slack = prune > 0.0 ? -std::log(prune) / gamma
                                   : std::numeric_limits<double>::infinity();
  std::vector<Entry> entries;
  entries.reserve(n * 16);
  for (std::size_t i = 0; i < n; ++i) {
    entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), 1.0});
    const auto nbrs = index.neighbors(i);
    const double nearest = squared_distance(x.row(i), x.row(nbrs[0]));
    for (std::uint32_t j : nbrs) {
      const double d2 = squared_distance(x.row(i), x.row(j));
      if (d2 > nearest + slack) break;
      const double w = std::exp(-gamma * d2);
      if (w == 0.0) break;
      entries.push_back({static_cast<std::uint32_t>(i), j, w});
      entries.push_back({j, static_cast<std::uint32_t>(i), w});
    }
  }
  AffinityGraph g;
  g.kernel = {Kernel::kRbf, gamma, 0};
  g.weights = from_entries(n, std::move(entries));
  return g;
}

AffinityGraph knn_affinity(const Matrix& points, int n_neighbors) {
  if (points.rows() < 2) throw ValidationError("knn affinity needs at least two points");
  return knn_affinity(NeighborIndex(points), n_neighbors);
}

AffinityGraph knn_affinity(const NeighborIndex& index, int n_neighbors) {
  if (n_neighbors < 1) throw ValidationError("n_neighbors must be at least 1");
  const std::size_t n = index.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(n_neighbors), n - 1);
  std::vector<Entry> entries;
  entries.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nbrs = index.neighbors(i);
    for (std::size_t r = 0; r < k; ++r) {
      entries.push_back({static_cast<std::uint32_t>(i), nbrs[r], 1.0});
    }
  }
  AffinityGraph g;
  g.kernel = {Kernel::kKnn, 0.0, n_neighbors};
  g.weights = from_entries(n, std::move(entries));
  return g;
}

AffinityGraph build_affinity(const NeighborIndex& index, const KernelParams& kernel) {
  return kernel.kernel == Kernel::kRbf ? rbf_affinity(index, kernel.gamma)
                                       : knn_affinity(index, kernel.n_neighbors);
}

SparseMatrix transition_matrix(const AffinityGraph& graph) {
  SparseMatrix t = graph.weights;
  for (std::size_t i = 0; i < t.n; ++i) {
    const double sum = t.row_sum(i);
    if (!(sum > 0.0)) throw IsolatedNodeError(i);
    for (std::size_t k = t.row_ptr[i]; k < t.row_ptr[i + 1]; ++k) t.val[k] /= sum;
  }
  return t;
}

SparseMatrix normalized_affinity(const AffinityGraph& graph) {
  const SparseMatrix& w = graph.weights;
  std::vector<Entry> entries;
  entries.reserve(2 * w.nonzeros());
  for (std::size_t i = 0; i < w.n; ++i) {
    const auto cols = w.row_cols(i);
    const auto vals = w.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == i || vals[k] == 0.0) continue;
      entries.push_back({static_cast<std::uint32_t>(i), cols[k], vals[k]});
      entries.push_back({cols[k], static_cast<std::uint32_t>(i), vals[k]});
    }
  }
  SparseMatrix s = from_entries(w.n, std::move(entries));
  std::vector<double> inv_sqrt_degree(s.n, 0.0);
  for (std::size_t i = 0; i < s.n; ++i) {
    const double d = s.row_sum(i);
    inv_sqrt_degree[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  for (std::size_t i = 0; i < s.n; ++i) {
    for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
      s.val[k] *= inv_sqrt_degree[i] * inv_sqrt_degree[s.col[k]];
    }
  }
  return s;
}

SslParams default_propagation_params() {
  SslParams p;
  p.kernel = {Kernel::kRbf, 20.0, 7};
  p.max_iter = 1000;
  return p;
}

SslParams default_spreading_params() {
  SslParams p;
  p.kernel = {Kernel::kRbf, 20.0, 7};
  p.max_iter = 30;
  p.alpha = 0.2;
  return p;
}

SslResult label_propagation(const Dataset& ds, const SslParams& params) {
  check_ssl_input(ds, params, false);
  if (ds.fully_labeled()) return trivially_labeled(ds);
  return label_propagation(ds, params, NeighborIndex(ds.features));
}

SslResult label_propagation(const Dataset& ds, const SslParams& params,
                            const NeighborIndex& index) {
  check_ssl_input(ds, params, false);
  if (index.size() != ds.size()) throw ValidationError("neighbor index does not match dataset");
  if (ds.fully_labeled()) return trivially_labeled(ds);
  return propagate(ds, params, build_affinity(index, params.kernel));
}

SslResult label_spreading(const Dataset& ds, const SslParams& params) {
  check_ssl_input(ds, params, true);
  if (ds.fully_labeled()) return trivially_labeled(ds);
  return label_spreading(ds, params, NeighborIndex(ds.features));
}

SslResult label_spreading(const Dataset& ds, const SslParams& params,
                          const NeighborIndex& index) {
  check_ssl_input(ds, params, true);
  if (index.size() != ds.size()) throw ValidationError("neighbor index does not match dataset");
  if (ds.fully_labeled()) return trivially_labeled(ds);
  return spread(ds, params, build_affinity(index, params.kernel));
}

SslResult pseudo_label(Learner learner, const Dataset& ds, const SslParams& params,
                       const NeighborIndex& index) {
  return learner == Learner::kPropagation ? label_propagation(ds, params, index)
                                          : label_spreading(ds, params, index);
}

void write_label_distribution_csv(const SslResult& result, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "row,score_0,score_1,label\n";
  const Matrix& s = result.distribution.scores;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    out << i << ',' << format_double(s(i, 0)) << ',' << format_double(s(i, 1)) << ','
        << result.dataset.labels[i] << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace dapper
