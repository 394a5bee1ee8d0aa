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

#include "dapper/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "dapper/error.hpp"

namespace dapper {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string cell_tag(Treatment treatment, Learner learner) {
  return to_string(treatment) + "/" + to_string(learner);
}

}  // namespace

std::string to_string(Treatment treatment) {
  switch (treatment) {
    case Treatment::kDefault:
      return "default";
    case Treatment::kOptimizedSsl:
      return "optimized_ssl_only";
    case Treatment::kDapper:
      return "dapper";
  }
  return "default";
}

Treatment parse_treatment(const std::string& text) {
  if (text == "default") return Treatment::kDefault;
  if (text == "optimized_ssl_only" || text == "optimized") return Treatment::kOptimizedSsl;
  if (text == "dapper") return Treatment::kDapper;
  throw ValidationError("unknown treatment '" + text +
                        "' (expected default, optimized_ssl_only or dapper)");
}

std::string display_name(Treatment treatment, Learner learner) {
  const std::string suffix = learner == Learner::kPropagation ? "LP" : "LS";
  switch (treatment) {
    case Treatment::kDefault:
      return "Default " + suffix;
    case Treatment::kOptimizedSsl:
      return "Optimized " + suffix;
    case Treatment::kDapper:
      return "Dapper + " + suffix;
  }
  return suffix;
}

std::vector<Cell> all_cells() {
  std::vector<Cell> cells;
  for (Learner l : {Learner::kPropagation, Learner::kSpreading}) {
    for (Treatment t : {Treatment::kDefault, Treatment::kOptimizedSsl, Treatment::kDapper}) {
      cells.push_back({t, l});
    }
  }
  return cells;
}

Dataset load_source(const DataSource& source) {
  if (source.path) return load_csv(*source.path, source.label_column, source.positive_label);
  const auto& s = source.synthetic;
  return synth_generate(s.n, s.d, s.minority_fraction, s.separation, s.seed);
}

void ExperimentConfig::validate() const {
  split.validate();
  if (!(label_rate > 0.0 && label_rate <= 1.0)) {
    throw ValidationError("label_rate must be in (0, 1], got " + std::to_string(label_rate));
  }
  if (!(imbalance_threshold > 0.0 && imbalance_threshold < 1.0)) {
    throw ValidationError("threshold must be in (0, 1), got " +
                          std::to_string(imbalance_threshold));
  }
  if (treatment != Treatment::kDefault && n_trials < 1) {
    throw ValidationError("trials must be at least 1");
  }
}

DatasetSplits split_source(const Dataset& source, const SplitSpec& split, std::uint64_t seed) {
  SplitSpec spec = split;
  spec.seed = derive_seed(seed, "split");
  return stratified_split(source, spec);
}

PreparedData prepare(const Dataset& source, const SplitSpec& split, std::uint64_t seed) {
  PreparedData p;
  p.splits = split_source(source, split, seed);
  check_disjoint(p.splits);
  p.index = std::make_shared<const NeighborIndex>(p.splits.train.features);
  return p;
}

std::uint64_t mask_seed(std::uint64_t seed, double rate) {
  return derive_seed(seed, "mask", static_cast<std::uint64_t>(std::llround(rate * 1e6)));
}

TrialData trial_data(const PreparedData& prepared, double label_rate, std::uint64_t seed) {
  TrialData d;
  d.train = label_rate >= 1.0 ? prepared.splits.train
                              : mask_labels(prepared.splits.train, {label_rate, mask_seed(seed, label_rate)});
  d.val = prepared.splits.val;
  d.index = prepared.index;
  return d;
}

ParamSpace ssl_space(Learner learner) {
  ParamSpace space;
  space.add(Dimension::categorical("kernel", {"rbf", "knn"}));
  space.add(Dimension::real("gamma", 10.0, 30.0, Condition{"kernel", {"rbf"}}));
  space.add(Dimension::integer("n_neighbors", 5, 15, Condition{"kernel", {"knn"}}));
  if (learner == Learner::kSpreading) space.add(Dimension::real("alpha", 0.1, 0.9));
  space.add(Dimension::integer("max_iter", 500, 1500));
  return space;
}

ParamSpace dapper_space(Learner learner) {
  ParamSpace space = ssl_space(learner);
  space.add(Dimension::integer("smote_k", 1, 20));
  space.add(Dimension::integer("smote_r", 1, 6));
  space.add(Dimension::integer("smote_m", 50, 500));
  space.add(Dimension::integer("n_estimators", 50, 200));
  space.add(Dimension::integer("min_samples_leaf", 1, 25));
  space.add(Dimension::integer("min_samples_split", 2, 25));
  space.add(Dimension::integer("max_leaf_nodes", 2, 100));
  space.add(Dimension::integer("max_depth", 1, 25));
  space.add(Dimension::categorical("max_features", {"auto", "sqrt", "log2"}));
  space.add(Dimension::categorical("bootstrap", {"true", "false"}));
  return space;
}

ParamSpace treatment_space(Treatment treatment, Learner learner) {
  switch (treatment) {
    case Treatment::kDefault:
      return {};
    case Treatment::kOptimizedSsl:
      return ssl_space(learner);
    case Treatment::kDapper:
      return dapper_space(learner);
  }
  return {};
}

SslParams ssl_params_from(const HyperparamSample& s, Learner learner) {
  SslParams p = learner == Learner::kPropagation ? default_propagation_params()
                                                 : default_spreading_params();
  if (s.has("kernel")) p.kernel.kernel = parse_kernel(s.get_string("kernel"));
  if (s.has("gamma")) p.kernel.gamma = s.get_real("gamma");
  if (s.has("n_neighbors")) p.kernel.n_neighbors = static_cast<int>(s.get_int("n_neighbors"));
  if (s.has("max_iter")) p.max_iter = static_cast<int>(s.get_int("max_iter"));
  if (s.has("alpha")) p.alpha = s.get_real("alpha");
  return p;
}

SmoteParams smote_params_from(const HyperparamSample& s, std::uint64_t seed) {
  SmoteParams p;
  p.seed = seed;
  if (s.has("smote_k")) p.k = static_cast<int>(s.get_int("smote_k"));
  if (s.has("smote_r")) p.r = static_cast<int>(s.get_int("smote_r"));
  if (s.has("smote_m")) p.m = static_cast<int>(s.get_int("smote_m"));
  return p;
}

ForestParams forest_params_from(const HyperparamSample& s, std::uint64_t seed) {
  ForestParams p = default_forest_params(seed);
  if (s.has("n_estimators")) p.n_estimators = static_cast<int>(s.get_int("n_estimators"));
  if (s.has("min_samples_leaf")) p.min_samples_leaf = static_cast<int>(s.get_int("min_samples_leaf"));
  if (s.has("min_samples_split")) {
    p.min_samples_split = static_cast<int>(s.get_int("min_samples_split"));
  }
  if (s.has("max_leaf_nodes")) p.max_leaf_nodes = static_cast<int>(s.get_int("max_leaf_nodes"));
  if (s.has("max_depth")) p.max_depth = static_cast<int>(s.get_int("max_depth"));
  if (s.has("max_features")) p.max_features = parse_max_features(s.get_string("max_features"));
  if (s.has("bootstrap")) p.bootstrap = s.get_string("bootstrap") == "true";
  return p;
}

MetricReport evaluate(const ForestModel& model, const Dataset& ds) {
  if (!ds.fully_labeled()) throw ValidationError("evaluation set must be fully labeled");
  const Matrix proba = predict_proba(model, ds.features);
  std::vector<Label> pred(ds.size());
  std::vector<double> score(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    score[i] = proba(i, 1);
    pred[i] = proba(i, 1) > proba(i, 0) ? kPositive : kNegative;
  }
  MetricReport r = compute_metrics(confusion(ds.labels, pred));
  if (const auto auc = auc_roc(ds.labels, score)) r.auc = *auc * 100.0;
  return r;
}

TrialFit fit_trial(const HyperparamSample& sample, const TrialData& data,
                   const TrialSettings& settings, std::size_t trial) {
  TrialFit fit;
  if (!data.index) throw ValidationError("trial data has no neighbor index");
  const SslParams ssl = ssl_params_from(sample, settings.learner);
  fit.mixed = pseudo_label(settings.learner, data.train, ssl, *data.index).dataset;
  fit.mixed_minority_fraction = minority_fraction(fit.mixed);

  const Dataset* training = &fit.mixed;
  Dataset rebalanced;
  if (fit.mixed_minority_fraction < settings.imbalance_threshold && sample.has("smote_k")) {
    SmoteParams sp = smote_params_from(sample, derive_seed(settings.seed, "smote", trial));
    sp.cap_at_balance = settings.smote_cap;
    rebalanced = smote(fit.mixed, sp);
    training = &rebalanced;
    fit.smote_applied = true;
  }
  fit.training_size = training->size();
  fit.model = fit_forest(*training, forest_params_from(sample, derive_seed(settings.seed, "forest", trial)),
                         settings.forest_threads);
  fit.val_metrics = evaluate(fit.model, data.val);
  fit.loss = loss_from_report(fit.val_metrics);
  return fit;
}

TrialOutcome run_trial(const HyperparamSample& sample, const TrialData& data,
                       const TrialSettings& settings, std::size_t trial) {
  TrialOutcome out;
  try {
    TrialFit fit = fit_trial(sample, data, settings, trial);
    out.loss = fit.loss;
    out.metrics = fit.val_metrics;
    out.smote_applied = fit.smote_applied;
  } catch (const std::exception& e) {
    out.loss = 1.0;
    out.note = e.what();
  }
  return out;
}

CellResult run_cell(const ExperimentConfig& cfg, const PreparedData& prepared,
                    const ProgressCallback& progress) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const TrialData data = trial_data(prepared, cfg.label_rate, cfg.seed);
  TrialSettings settings;
  settings.learner = cfg.learner;
  settings.imbalance_threshold = cfg.imbalance_threshold;
  settings.smote_cap = cfg.smote_cap;
  settings.seed = derive_seed(cfg.seed, "trial");
  settings.forest_threads = cfg.forest_threads;

  CellResult result;
  result.space = treatment_space(cfg.treatment, cfg.learner);
  std::size_t trial = 0;
  if (cfg.treatment != Treatment::kDefault) {
    const Objective objective = [&](const HyperparamSample& s, std::size_t i) {
      return run_trial(s, data, settings, i);
    };
    OptimizeResult opt = optimize(objective, result.space, cfg.n_trials,
                                  derive_seed(cfg.seed, cell_tag(cfg.treatment, cfg.learner),
                                              static_cast<std::uint64_t>(std::llround(cfg.label_rate * 1e6))),
                                  {}, progress);
    result.history = std::move(opt.history);
    result.best = opt.best;
    result.selected = opt.best.sample;
    trial = opt.best.index;
  }

  TrialFit fit = fit_trial(result.selected, data, settings, trial);
  result.model = std::move(fit.model);

  ResultRow& row = result.row;
  row.treatment = cfg.treatment;
  row.learner = cfg.learner;
  row.label_rate = cfg.label_rate;
  row.metrics = evaluate(result.model, prepared.splits.test);
  row.labeled_size = data.train.labeled_count();
  row.trials = result.history.size();
  row.smote_applied = fit.smote_applied;
  if (result.best) row.val_loss = result.best->loss;
  row.seed = cfg.seed;
  row.wall_time_s = seconds_since(start);
  return result;
}

CellResult run_treatment(const ExperimentConfig& cfg, const ProgressCallback& progress) {
  cfg.validate();
  const PreparedData prepared = prepare(load_source(cfg.data), cfg.split, cfg.seed);
  return run_cell(cfg, prepared, progress);
}

CellResult dapper(const ExperimentConfig& cfg, const ProgressCallback& progress) {
  if (cfg.treatment != Treatment::kDapper) throw ValidationError("dapper() needs treatment dapper");
  return run_treatment(cfg, progress);
}

std::vector<ResultRow> sensitivity(const ExperimentConfig& cfg, const std::vector<double>& rates,
                                   const std::vector<Cell>& cells, unsigned jobs,
                                   const RowCallback& on_row) {
  if (rates.empty()) throw ValidationError("sensitivity needs at least one label rate");
  if (cells.empty()) throw ValidationError("sensitivity needs at least one treatment");
  cfg.validate();
  const PreparedData prepared = prepare(load_source(cfg.data), cfg.split, cfg.seed);

  std::vector<ExperimentConfig> work;
  for (const Cell& c : cells) {
    for (double rate : rates) {
      ExperimentConfig e = cfg;
      e.treatment = c.treatment;
      e.learner = c.learner;
      e.label_rate = rate;
      e.validate();
      work.push_back(e);
    }
  }
  std::vector<ResultRow> rows(work.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::mutex callback_mutex;
  const auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < work.size();) {
      try {
        rows[i] = run_cell(work[i], prepared).row;
        if (on_row) {
          std::lock_guard lock(callback_mutex);
          on_row(rows[i]);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = work.size();
      }
    }
  };
  const unsigned n_workers = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(work.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::vector<ImbalancePoint> imbalance_probe(const ExperimentConfig& cfg,
                                            const std::vector<double>& rates,
                                            const std::vector<Learner>& learners) {
  if (rates.empty()) throw ValidationError("probe needs at least one label rate");
  const PreparedData prepared = prepare(load_source(cfg.data), cfg.split, cfg.seed);
  std::vector<ImbalancePoint> out;
  for (double rate : rates) {
    if (!(rate > 0.0 && rate <= 1.0)) {
      throw ValidationError("label rate must be in (0, 1], got " + std::to_string(rate));
    }
    const TrialData data = trial_data(prepared, rate, cfg.seed);
    for (Learner l : learners) {
      const SslParams p = l == Learner::kPropagation ? default_propagation_params()
                                                     : default_spreading_params();
      const Dataset mixed = pseudo_label(l, data.train, p, *data.index).dataset;
      out.push_back({rate, l, minority_fraction(mixed), data.train.labeled_count()});
    }
  }
  return out;
}

void check_disjoint(const DatasetSplits& splits) {
  std::unordered_set<std::size_t> seen;
  for (const Dataset* part : {&splits.train, &splits.val, &splits.test}) {
    for (std::size_t id : part->row_ids) {
      if (id == kSyntheticRow) continue;
      if (!seen.insert(id).second) {
        throw Error("source row " + std::to_string(id) + " appears in more than one split");
      }
    }
  }
}

}  // namespace dapper
