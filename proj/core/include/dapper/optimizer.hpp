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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dapper/metrics.hpp"
#include "dapper/random.hpp"

namespace dapper {

enum class DimensionKind { kCategorical, kReal, kInteger };

// The dimension is active only when categorical `parent` takes one of `values`.
struct Condition {
  std::string parent;
  std::vector<std::string> values;
};

struct Dimension {
  std::string name;
  DimensionKind kind = DimensionKind::kReal;
  double low = 0.0;   // numeric bounds, inclusive
  double high = 0.0;
  std::vector<std::string> choices;
  std::optional<Condition> condition;

  static Dimension categorical(std::string name, std::vector<std::string> choices,
                               std::optional<Condition> condition = std::nullopt);
  static Dimension real(std::string name, double low, double high,
                        std::optional<Condition> condition = std::nullopt);
  static Dimension integer(std::string name, std::int64_t low, std::int64_t high,
                           std::optional<Condition> condition = std::nullopt);
};

using ParamValue = std::variant<std::int64_t, double, std::string>;

// One concrete value per active dimension.
class HyperparamSample {
 public:
  void set(const std::string& name, ParamValue value) { values_[name] = std::move(value); }
  bool has(const std::string& name) const { return values_.count(name) > 0; }
  const ParamValue& at(const std::string& name) const;

  std::int64_t get_int(const std::string& name) const;
  double get_real(const std::string& name) const;
  const std::string& get_string(const std::string& name) const;

  const std::map<std::string, ParamValue>& values() const { return values_; }
  bool operator==(const HyperparamSample&) const = default;

 private:
  std::map<std::string, ParamValue> values_;
};

std::string to_string(const ParamValue& value);

// Ordered list of dimensions. A conditional dimension must follow its parent.
class ParamSpace {
 public:
  ParamSpace() = default;
  explicit ParamSpace(std::vector<Dimension> dims);

  ParamSpace& add(Dimension dim);
  const std::vector<Dimension>& dims() const { return dims_; }
  const Dimension* find(const std::string& name) const;
  bool empty() const { return dims_.empty(); }

  bool is_active(const Dimension& dim, const HyperparamSample& partial) const;
  // Throws ValidationError if a value is out of bounds, of the wrong type,
  // missing while active, or present while inactive.
  void check(const HyperparamSample& sample) const;

 private:
  std::vector<Dimension> dims_;
};

struct TrialOutcome {
  double loss = 1.0;
  MetricReport metrics;
  std::optional<bool> smote_applied;
  std::string note;
};

struct TrialRecord {
  std::size_t index = 0;
  HyperparamSample sample;
  double loss = 1.0;
  MetricReport metrics;
  std::optional<bool> smote_applied;
  std::string note;
  double wall_time_s = 0.0;
};

struct TpeOptions {
  std::size_t n_startup = 20;
  double gamma = 0.25;         // fraction of trials forming the "good" set
  std::size_t n_candidates = 24;
  double prior_weight = 1.0;   // weight of the uniform prior in each density
};

// Tree-structured Parzen estimator: independent uniform draws during startup,
// then the candidate with the largest good/bad density ratio among
// n_candidates drawn from the good density.
HyperparamSample sample(const ParamSpace& space, std::span<const TrialRecord> history, Rng& rng,
                        const TpeOptions& options = {});

using Objective = std::function<TrialOutcome(const HyperparamSample&, std::size_t trial)>;
using ProgressCallback = std::function<void(const TrialRecord& trial, const TrialRecord& best)>;

struct OptimizeResult {
  TrialRecord best;
  std::vector<TrialRecord> history;
};

// Runs exactly n_trials sequential evaluations. A throwing objective records
// loss 1 with the exception message as note. The best trial has minimal loss,
// ties to the earliest.
OptimizeResult optimize(const Objective& objective, const ParamSpace& space, std::size_t n_trials,
                        std::uint64_t seed, const TpeOptions& options = {},
                        const ProgressCallback& progress = {});

// Columns: trial, one per dimension (blank when inactive), loss, metrics,
// smote_applied, [wall_time_s,] note.
std::string history_to_csv(const ParamSpace& space, std::span<const TrialRecord> history,
                           bool include_wall_time = true);

}  // namespace dapper
