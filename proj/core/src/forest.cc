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

#include "dapper/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <queue>
#include <thread>

#include "dapper/error.hpp"
#include "dapper/io.hpp"
#include "dapper/random.hpp"
#include "json.hpp"

namespace dapper {
namespace {

using json = nlohmann::json;

constexpr int kModelFormatVersion = 1;

struct Split {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;     // sum over children of (c0^2 + c1^2) / n
  double decrease = 0.0;  // weighted Gini decrease, normalized by tree sample count
};

struct Pending {
  int node = 0;
  std::vector<std::uint32_t> samples;
  Split split;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, const ForestParams& params, Rng rng)
      : ds_(ds), params_(params), rng_(rng),
        mtry_(features_per_split(params.max_features, ds.dims())) {
    features_.resize(ds.dims());
    std::iota(features_.begin(), features_.end(), 0);
  }

  DecisionTree build() {
    const std::size_t n = ds_.size();
    std::vector<std::uint32_t> samples(n);
    if (params_.bootstrap) {
      for (auto& s : samples) s = static_cast<std::uint32_t>(uniform_index(rng_, n));
    } else {
      std::iota(samples.begin(), samples.end(), 0u);
    }
    total_ = static_cast<double>(samples.size());

    std::vector<Pending> pending;
    auto cmp = [&](int a, int b) {
      const Split& sa = pending[static_cast<std::size_t>(a)].split;
      const Split& sb = pending[static_cast<std::size_t>(b)].split;
      if (sa.decrease != sb.decrease) return sa.decrease < sb.decrease;
      return pending[static_cast<std::size_t>(a)].node > pending[static_cast<std::size_t>(b)].node;
    };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> queue(cmp);

    auto add_node = [&](std::vector<std::uint32_t> s, int depth) {
      TreeNode node;
      node.depth = depth;
      for (auto i : s) (ds_.labels[i] == kPositive ? node.count1 : node.count0) += 1.0;
      const int id = static_cast<int>(nodes_.size());
      nodes_.push_back(node);
      Split split = find_split(s, nodes_.back());
      if (split.valid) {
        pending.push_back({id, std::move(s), split});
        queue.push(static_cast<int>(pending.size() - 1));
      }
      return id;
    };

    add_node(std::move(samples), 0);
    const std::size_t leaf_budget =
        params_.max_leaf_nodes ? static_cast<std::size_t>(*params_.max_leaf_nodes)
                               : std::numeric_limits<std::size_t>::max();
    std::size_t leaves = 1;
    while (!queue.empty() && leaves < leaf_budget) {
      const int p = queue.top();
      queue.pop();
      Pending& work = pending[static_cast<std::size_t>(p)];
      const int id = work.node;
      const Split split = work.split;
      std::vector<std::uint32_t> left, right;
      for (auto i : work.samples) {
        (ds_.features(i, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right)
            .push_back(i);
      }
      work.samples = {};
      const int depth = nodes_[static_cast<std::size_t>(id)].depth + 1;
      const int l = add_node(std::move(left), depth);
      const int r = add_node(std::move(right), depth);
      TreeNode& node = nodes_[static_cast<std::size_t>(id)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = l;
      node.right = r;
      ++leaves;
    }
    return DecisionTree(std::move(nodes_));
  }

 private:
  Split find_split(const std::vector<std::uint32_t>& samples, const TreeNode& node) {
    Split best;
    const std::size_t n = samples.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    if (params_.max_depth && node.depth >= *params_.max_depth) return best;
    if (n < static_cast<std::size_t>(params_.min_samples_split) || n < 2 * min_leaf) return best;
    if (node.count0 == 0.0 || node.count1 == 0.0) return best;

    // Partial Fisher-Yates draw of mtry features, examined in index order.
    for (std::size_t i = 0; i < mtry_; ++i) {
      std::swap(features_[i], features_[i + uniform_index(rng_, features_.size() - i)]);
    }
    std::vector<std::size_t> chosen(features_.begin(),
                                    features_.begin() + static_cast<std::ptrdiff_t>(mtry_));
    std::sort(chosen.begin(), chosen.end());

    const double p0 = node.count0, p1 = node.count1;
    const double parent_score = (p0 * p0 + p1 * p1) / static_cast<double>(n);
    values_.resize(n);
    for (std::size_t f : chosen) {
      for (std::size_t k = 0; k < n; ++k) {
        values_[k] = {ds_.features(samples[k], f), ds_.labels[samples[k]] == kPositive};
      }
      std::sort(values_.begin(), values_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double l0 = 0.0, l1 = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        (values_[k].second ? l1 : l0) += 1.0;
        const std::size_t nl = k + 1;
        if (values_[k].first == values_[k + 1].first) continue;
        if (nl < min_leaf || n - nl < min_leaf) continue;
        const double r0 = p0 - l0, r1 = p1 - l1;
        const double score = (l0 * l0 + l1 * l1) / static_cast<double>(nl) +
                             (r0 * r0 + r1 * r1) / static_cast<double>(n - nl);
        if (!best.valid || score > best.score + 1e-12 * std::max(1.0, std::abs(best.score))) {
          double threshold = 0.5 * (values_[k].first + values_[k + 1].first);
          if (threshold >= values_[k + 1].first) threshold = values_[k].first;
          best = {true, static_cast<int>(f), threshold, score, 0.0};
        }
      }
    }
    if (best.valid) best.decrease = (best.score - parent_score) / total_;
    return best;
  }

  const Dataset& ds_;
  const ForestParams& params_;
  Rng rng_;
  std::size_t mtry_;
  double total_ = 0.0;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, bool>> values_;
  std::vector<TreeNode> nodes_;
};

json params_to_json(const ForestParams& p) {
  json j;
  j["n_estimators"] = p.n_estimators;
  j["min_samples_leaf"] = p.min_samples_leaf;
  j["min_samples_split"] = p.min_samples_split;
  j["max_leaf_nodes"] = p.max_leaf_nodes ? json(*p.max_leaf_nodes) : json(nullptr);
  j["max_depth"] = p.max_depth ? json(*p.max_depth) : json(nullptr);
  j["max_features"] = to_string(p.max_features);
  j["bootstrap"] = p.bootstrap;
  j["seed"] = p.seed;
  return j;
}

ForestParams params_from_json(const json& j) {
  ForestParams p;
  p.n_estimators = j.at("n_estimators").get<int>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<int>();
  if (!j.at("max_leaf_nodes").is_null()) p.max_leaf_nodes = j.at("max_leaf_nodes").get<int>();
  if (!j.at("max_depth").is_null()) p.max_depth = j.at("max_depth").get<int>();
  p.max_features = parse_max_features(j.at("max_features").get<std::string>());
  p.bootstrap = j.at("bootstrap").get<bool>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

}  // namespace

std::string to_string(MaxFeatures mf) {
  switch (mf) {
    case MaxFeatures::kAuto: return "auto";
    case MaxFeatures::kSqrt: return "sqrt";
    case MaxFeatures::kLog2: return "log2";
  }
  return "auto";
}

MaxFeatures parse_max_features(const std::string& text) {
  if (text == "auto") return MaxFeatures::kAuto;
  if (text == "sqrt") return MaxFeatures::kSqrt;
  if (text == "log2") return MaxFeatures::kLog2;
  throw ValidationError("unknown max_features '" + text + "' (expected auto, sqrt or log2)");
}

std::size_t features_per_split(MaxFeatures mf, std::size_t d) {
  if (d == 0) return 0;
  const double dd = static_cast<double>(d);
  const double raw = mf == MaxFeatures::kLog2 ? std::ceil(std::log2(dd)) : std::ceil(std::sqrt(dd));
  return std::clamp<std::size_t>(static_cast<std::size_t>(raw), 1, d);
}

void ForestParams::validate() const {
  if (n_estimators < 1) throw ValidationError("n_estimators must be at least 1");
  if (min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be at least 1");
  if (min_samples_split < 2) throw ValidationError("min_samples_split must be at least 2");
  if (max_leaf_nodes && *max_leaf_nodes < 2) throw ValidationError("max_leaf_nodes must be at least 2");
  if (max_depth && *max_depth < 1) throw ValidationError("max_depth must be at least 1");
}

ForestParams default_forest_params(std::uint64_t seed) {
  ForestParams p;
  p.seed = seed;
  return p;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                         : n.right);
  }
  return nodes_[i];
}

double DecisionTree::positive_fraction(std::span<const double> x) const {
  const TreeNode& leaf = leaf_for(x);
  const double total = leaf.count0 + leaf.count1;
  return total > 0.0 ? leaf.count1 / total : 0.0;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

ForestModel fit_forest(const Dataset& ds, const ForestParams& params, unsigned threads) {
  params.validate();
  if (ds.size() == 0) throw ValidationError("cannot fit a forest on an empty dataset");
  if (ds.dims() == 0) throw ValidationError("cannot fit a forest on zero features");
  if (!ds.fully_labeled()) throw ValidationError("fit_forest needs a fully labeled dataset");

  ForestModel model;
  model.params = params;
  model.dims = ds.dims();
  model.trees.resize(static_cast<std::size_t>(params.n_estimators));

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(params.n_estimators));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t t = next++; t < model.trees.size(); t = next++) {
      TreeBuilder builder(ds, params, make_rng(params.seed, "tree", t));
      model.trees[t] = builder.build();
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
  }
  return model;
}

Matrix predict_proba(const ForestModel& model, const Matrix& x) {
  if (x.cols() != model.dims) {
    throw ValidationError("model expects " + std::to_string(model.dims) + " features, got " +
                          std::to_string(x.cols()));
  }
  Matrix out(x.rows(), 2, 0.0);
  const double inv = 1.0 / static_cast<double>(model.trees.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double p1 = 0.0;
    for (const auto& tree : model.trees) p1 += tree.positive_fraction(x.row(i));
    p1 *= inv;
    out(i, 1) = p1;
    out(i, 0) = 1.0 - p1;
  }
  return out;
}

std::vector<Label> predict(const ForestModel& model, const Matrix& x) {
  const Matrix proba = predict_proba(model, x);
  std::vector<Label> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out[i] = proba(i, 1) > proba(i, 0) ? kPositive : kNegative;
  }
  return out;
}

std::string model_to_json(const ForestModel& model) {
  json j;
  j["format"] = "dapper-forest";
  j["version"] = kModelFormatVersion;
  j["dims"] = model.dims;
  j["params"] = params_to_json(model.params);
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json t;
    std::vector<int> feature, left, right, depth;
    std::vector<double> threshold, c0, c1;
    for (const auto& n : tree.nodes()) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      depth.push_back(n.depth);
      c0.push_back(n.count0);
      c1.push_back(n.count1);
    }
    t["feature"] = feature;
    t["threshold"] = threshold;
    t["left"] = left;
    t["right"] = right;
    t["depth"] = depth;
    t["count0"] = c0;
    t["count1"] = c1;
    trees.push_back(std::move(t));
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

ForestModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "dapper-forest") {
      throw ValidationError("not a dapper forest model");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw ValidationError("unsupported model version " + j.at("version").dump());
    }
    ForestModel model;
    model.dims = j.at("dims").get<std::size_t>();
    model.params = params_from_json(j.at("params"));
    for (const auto& t : j.at("trees")) {
      const auto feature = t.at("feature").get<std::vector<int>>();
      const auto threshold = t.at("threshold").get<std::vector<double>>();
      const auto left = t.at("left").get<std::vector<int>>();
      const auto right = t.at("right").get<std::vector<int>>();
      const auto depth = t.at("depth").get<std::vector<int>>();
      const auto c0 = t.at("count0").get<std::vector<double>>();
      const auto c1 = t.at("count1").get<std::vector<double>>();
      const std::size_t n = feature.size();
      if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n ||
          depth.size() != n || c0.size() != n || c1.size() != n) {
        throw ValidationError("model tree arrays have inconsistent lengths");
      }
      std::vector<TreeNode> nodes(n);
      for (std::size_t i = 0; i < n; ++i) {
        nodes[i] = {feature[i], threshold[i], left[i], right[i], depth[i], c0[i], c1[i]};
        if (feature[i] >= 0) {
          const int self = static_cast<int>(i);
          const bool ok = static_cast<std::size_t>(feature[i]) < model.dims && left[i] > self &&
                          right[i] > self && static_cast<std::size_t>(left[i]) < n &&
                          static_cast<std::size_t>(right[i]) < n;
          if (!ok) throw ValidationError("model tree has an out-of-range node reference");
        }
      }
      model.trees.emplace_back(std::move(nodes));
    }
    if (model.trees.empty()) throw ValidationError("model has no trees");
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model) + "\n");
}

ForestModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path));
}

}  // namespace dapper
