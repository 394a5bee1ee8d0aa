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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dapper/dataset.hpp"
#include "dapper/forest.hpp"
#include "dapper/graph_ssl.hpp"
#include "dapper/metrics.hpp"
#include "dapper/optimizer.hpp"
#include "dapper/smote.hpp"

namespace dapper {

enum class Treatment { kDefault, kOptimizedSsl, kDapper };

std::string to_string(Treatment treatment);
Treatment parse_treatment(const std::string& text);

// "Default LP", "Optimized LS", "Dapper + LP", ...
std::string display_name(Treatment treatment, Learner learner);

struct Cell {
  Treatment treatment = Treatment::kDapper;
  Learner learner = Learner::kPropagation;

  bool operator==(const Cell&) const = default;
};

// The six treatment and learner combinations in report order.
std::vector<Cell> all_cells();

struct SyntheticSpec {
  std::size_t n = 5000;
  std::size_t d = 12;
  double minority_fraction = 0.0484;
  double separation = 2.5;
  std::uint64_t seed = 0;
};

struct DataSource {
  std::optional<std::filesystem::path> path;  // synthetic data when empty
  std::string label_column = "label";
  std::string positive_label = "1";
  SyntheticSpec synthetic;
};

Dataset load_source(const DataSource& source);

struct ExperimentConfig {
  DataSource data;
  SplitSpec split;
  double label_rate = 0.1;
  Learner learner = Learner::kPropagation;
  Treatment treatment = Treatment::kDapper;
  double imbalance_threshold = 0.30;
  std::size_t n_trials = 100;
  std::uint64_t seed = 0;
  bool smote_cap = true;
  unsigned forest_threads = 1;

  // Throws ValidationError naming the offending setting.
  void validate() const;
};

// Split, masked training set and the neighbor index shared by every trial.
// All treatments built from the same seed see the same partition and mask.
struct PreparedData {
  DatasetSplits splits;
  std::shared_ptr<const NeighborIndex> index;  // over splits.train features
};

// stratified_split under the stream derived from `seed`.
DatasetSplits split_source(const Dataset& source, const SplitSpec& split, std::uint64_t seed);

PreparedData prepare(const Dataset& source, const SplitSpec& split, std::uint64_t seed);

// Seed of the label mask at `rate`; shared by all treatments.
std::uint64_t mask_seed(std::uint64_t seed, double rate);

// Training rows keep their order; unlabeled rows carry kUnlabeled.
struct TrialData {
  Dataset train;
  Dataset val;
  std::shared_ptr<const NeighborIndex> index;
};

TrialData trial_data(const PreparedData& prepared, double label_rate, std::uint64_t seed);

struct TrialSettings {
  Learner learner = Learner::kPropagation;
  double imbalance_threshold = 0.30;
  bool smote_cap = true;
  std::uint64_t seed = 0;
  unsigned forest_threads = 1;
};

// Search spaces. The SSL block depends on the learner (alpha only for
// spreading); the Dapper space adds SMOTE and forest dimensions.
ParamSpace ssl_space(Learner learner);
ParamSpace dapper_space(Learner learner);
ParamSpace treatment_space(Treatment treatment, Learner learner);

// Missing dimensions fall back to the untuned defaults.
SslParams ssl_params_from(const HyperparamSample& sample, Learner learner);
SmoteParams smote_params_from(const HyperparamSample& sample, std::uint64_t seed);
ForestParams forest_params_from(const HyperparamSample& sample, std::uint64_t seed);

struct TrialFit {
  Dataset mixed;  // labeled plus pseudo-labeled rows, before SMOTE
  double mixed_minority_fraction = 0.0;
  bool smote_applied = false;
  std::size_t training_size = 0;
  ForestModel model;
  MetricReport val_metrics;
  double loss = 1.0;
};

// Pseudo-labels, rebalances when the minority share of the mixed set is below
// the threshold, fits the forest and scores it on validation. The random
// streams depend only on (settings.seed, trial), so refitting a trial
// reproduces its model.
TrialFit fit_trial(const HyperparamSample& sample, const TrialData& data,
                   const TrialSettings& settings, std::size_t trial);

// fit_trial with every failure turned into loss 1 and a note.
TrialOutcome run_trial(const HyperparamSample& sample, const TrialData& data,
                       const TrialSettings& settings, std::size_t trial);

// Scores a model on a fully labeled set, AUC from class-1 probabilities.
MetricReport evaluate(const ForestModel& model, const Dataset& ds);

struct ResultRow {
  Treatment treatment = Treatment::kDefault;
  Learner learner = Learner::kPropagation;
  double label_rate = 0.0;
  MetricReport metrics;  // on the test set
  std::size_t labeled_size = 0;
  std::size_t trials = 0;
  std::optional<bool> smote_applied;
  std::optional<double> val_loss;  // of the selected trial
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
};

struct CellResult {
  ResultRow row;
  ParamSpace space;
  std::vector<TrialRecord> history;
  std::optional<TrialRecord> best;
  ForestModel model;
  HyperparamSample selected;
};

// Runs one treatment on an already prepared split (the sensitivity grid
// shares one split across its cells).
CellResult run_cell(const ExperimentConfig& cfg, const PreparedData& prepared,
                    const ProgressCallback& progress = {});

// Loads data, splits, masks and runs cfg.treatment.
CellResult run_treatment(const ExperimentConfig& cfg, const ProgressCallback& progress = {});

// run_treatment for the dapper treatment only.
CellResult dapper(const ExperimentConfig& cfg, const ProgressCallback& progress = {});

using RowCallback = std::function<void(const ResultRow& row)>;

// One row per (cell, rate), cells outermost. Up to `jobs` cells run at once;
// the output does not depend on it. `on_row` is called once per finished
// cell, one call at a time.
std::vector<ResultRow> sensitivity(const ExperimentConfig& cfg, const std::vector<double>& rates,
                                   const std::vector<Cell>& cells, unsigned jobs = 1,
                                   const RowCallback& on_row = {});

struct ImbalancePoint {
  double label_rate = 0.0;
  Learner learner = Learner::kPropagation;
  double minority_fraction = 0.0;  // of the mixed set
  std::size_t labeled_size = 0;
};

// Minority share of the pseudo-labeled training set under default SSL
// parameters. Rate 1 keeps every label.
std::vector<ImbalancePoint> imbalance_probe(const ExperimentConfig& cfg,
                                            const std::vector<double>& rates,
                                            const std::vector<Learner>& learners);

// Throws Error if any two parts share a source row.
void check_disjoint(const DatasetSplits& splits);

}  // namespace dapper
