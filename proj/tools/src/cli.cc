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

#include "dapper/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dapper/config.hpp"
#include "dapper/error.hpp"
#include "dapper/io.hpp"
#include "dapper/pipeline.hpp"
#include "dapper/report.hpp"

namespace dapper::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Storage for every flag of one subcommand plus the options that were added,
// so that only flags given on the command line override the config file.
struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, CLI::Option*> options;

  std::string config;
  std::string data, label_column, positive_label;
  std::size_t rows = 0, dims = 0;
  double minority_fraction = 0.0, separation = 0.0;
  std::uint64_t data_seed = 0;
  double train_frac = 0.0, val_frac = 0.0, test_frac = 0.0;
  std::string treatment, learner, rates, treatments;
  double label_rate = 0.0, threshold = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  bool smote_cap = true;
  unsigned threads = 1, jobs = 1;
  std::string out;
  std::string model;
  std::vector<std::string> results;

  bool given(const std::string& name) const {
    const auto it = options.find(name);
    return it != options.end() && it->second->count() > 0;
  }

  template <typename T>
  CLI::Option* add(const std::string& name, T& target, const std::string& help) {
    CLI::Option* opt = app->add_option("--" + name, target, help);
    options[name] = opt;
    return opt;
  }
};

CLI::Validator interval(double lo, double hi, bool lo_open, bool hi_open) {
  std::ostringstream desc;
  desc << (lo_open ? "(" : "[") << lo << ", " << hi << (hi_open ? ")" : "]");
  const std::string range = desc.str();
  return CLI::Validator(
      [=](std::string& text) -> std::string {
        double v = 0.0;
        try {
          std::size_t used = 0;
          v = std::stod(text, &used);
          if (used != text.size()) return "'" + text + "' is not a number";
        } catch (const std::exception&) {
          return "'" + text + "' is not a number";
        }
        const bool ok = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
        return ok ? std::string() : text + " is outside the legal range " + range;
      },
      range);
}

void add_config_flag(Command& c) {
  c.add("config", c.config, "JSON config file; flags given on the command line take precedence")
      ->check(CLI::ExistingFile);
}

void add_out_flag(Command& c) { c.add("out", c.out, "Output directory (output.dir, default out)"); }

void add_seed_flag(Command& c) { c.add("seed", c.seed, "Seed of every random stream (experiment.seed)"); }

void add_synthetic_flags(Command& c) {
  c.add("rows", c.rows, "Synthetic rows (synthetic.rows, default 5000)")->check(CLI::PositiveNumber);
  c.add("dims", c.dims, "Synthetic features (synthetic.dims, default 12)")->check(CLI::Range(2, 100000));
  c.add("minority-fraction", c.minority_fraction,
        "Synthetic minority share (synthetic.minority_fraction, default 0.0484)")
      ->check(interval(0.0, 0.5, true, true));
  c.add("separation", c.separation,
        "Distance between the synthetic class means (synthetic.separation, default 2.5)")
      ->check(CLI::NonNegativeNumber);
  c.add("data-seed", c.data_seed, "Seed of the synthetic generator (synthetic.data_seed)");
}

void add_source_flags(Command& c) {
  add_config_flag(c);
  c.add("data", c.data, "Input CSV with a header row (data.path); synthetic data when absent")
      ->check(CLI::ExistingFile);
  c.add("label-column", c.label_column, "Label column of --data (data.label_column, default label)");
  c.add("positive-label", c.positive_label,
        "Label value mapped to the positive class (data.positive_label, default 1)");
  add_synthetic_flags(c);
  c.add("train-frac", c.train_frac, "Training share (split.train_frac, default 0.64)")
      ->check(interval(0.0, 1.0, true, true));
  c.add("val-frac", c.val_frac, "Validation share (split.val_frac, default 0.16)")
      ->check(interval(0.0, 1.0, true, true));
  c.add("test-frac", c.test_frac, "Test share (split.test_frac, default 0.20)")
      ->check(interval(0.0, 1.0, true, true));
  add_seed_flag(c);
  add_out_flag(c);
}

void add_learner_flag(Command& c) {
  c.add("learner", c.learner, "propagation or spreading (experiment.learner)")
      ->check(CLI::IsMember({"propagation", "spreading", "lp", "ls"}));
}

void add_experiment_flags(Command& c) {
  c.add("threshold", c.threshold,
        "SMOTE runs when the pseudo-labeled minority share is below this (experiment.threshold, "
        "default 0.3)")
      ->check(interval(0.0, 1.0, true, true));
  c.add("trials", c.trials, "Optimizer trials per cell (experiment.trials, default 100)")
      ->check(CLI::PositiveNumber);
  c.add("smote-cap", c.smote_cap,
        "Never let SMOTE push the minority past the majority (experiment.smote_cap, default true)");
  c.add("threads", c.threads, "Threads per forest fit (experiment.threads, default 1)")
      ->check(CLI::Range(1u, 1024u));
}

RunConfig resolve(const Command& c) {
  RunConfig cfg = c.given("config") ? load_config(c.config) : default_run_config();
  ExperimentConfig& e = cfg.experiment;
  if (c.given("data")) e.data.path = c.data;
  if (c.given("label-column")) e.data.label_column = c.label_column;
  if (c.given("positive-label")) e.data.positive_label = c.positive_label;
  if (c.given("rows")) e.data.synthetic.n = c.rows;
  if (c.given("dims")) e.data.synthetic.d = c.dims;
  if (c.given("minority-fraction")) e.data.synthetic.minority_fraction = c.minority_fraction;
  if (c.given("separation")) e.data.synthetic.separation = c.separation;
  if (c.given("data-seed")) e.data.synthetic.seed = c.data_seed;
  if (c.given("train-frac")) e.split.train_frac = c.train_frac;
  if (c.given("val-frac")) e.split.val_frac = c.val_frac;
  if (c.given("test-frac")) e.split.test_frac = c.test_frac;
  if (c.given("treatment")) e.treatment = parse_treatment(c.treatment);
  if (c.given("learner")) e.learner = parse_learner(c.learner);
  if (c.given("label-rate")) e.label_rate = c.label_rate;
  if (c.given("rates")) {
    try {
      cfg.rates = parse_rates(c.rates);
    } catch (const ValidationError& ex) {
      throw ValidationError(std::string("--") + ex.what());
    }
  }
  if (c.given("treatments")) cfg.cells = parse_cells(c.treatments);
  if (c.given("threshold")) e.imbalance_threshold = c.threshold;
  if (c.given("trials")) e.n_trials = c.trials;
  if (c.given("seed")) e.seed = c.seed;
  if (c.given("smote-cap")) e.smote_cap = c.smote_cap;
  if (c.given("threads")) e.forest_threads = c.threads;
  if (c.given("jobs")) cfg.jobs = c.jobs;
  if (c.given("out")) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(dir_ / name, content);
    names_.push_back(name);
  }
  // For files written by a library call; lands atomically via rename.
  template <typename Writer>
  void write_with(const std::string& name, Writer&& writer) {
    const fs::path tmp = dir_ / ("." + name + ".partial");
    writer(tmp);
    fs::rename(tmp, dir_ / name);
    names_.push_back(name);
  }
  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_manifest(Outputs& outputs, const std::string& command,
                    const std::vector<std::string>& args, const RunConfig* cfg, double wall_time) {
  json m;
  m["tool"] = "dapper";
  m["version"] = DAPPER_VERSION;
  m["compiler"] = __VERSION__;
  m["command"] = command;
  m["args"] = args;
  if (cfg) {
    m["config"] = json::parse(config_to_json(*cfg));
    m["seed"] = cfg->experiment.seed;
  }
  m["wall_time_s"] = wall_time;
  m["outputs"] = outputs.names();
  outputs.write("manifest.json", m.dump(2) + "\n");
}

std::string format_loss(double v) { return format_fixed(v, 4); }

ProgressCallback trial_progress(std::ostream& err, std::size_t total, const std::string& label) {
  return [&err, total, label](const TrialRecord& trial, const TrialRecord& best) {
    err << label << " trial " << trial.index + 1 << "/" << total << " loss " << format_loss(trial.loss)
        << " best " << format_loss(best.loss);
    if (!trial.note.empty()) err << " (" << trial.note << ")";
    err << '\n';
  };
}

int cmd_gen_data(const Command& c, const std::vector<std::string>& args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig cfg = resolve(c);
  const auto& s = cfg.experiment.data.synthetic;
  const Dataset ds = synth_generate(s.n, s.d, s.minority_fraction, s.separation, s.seed);
  Outputs outputs(cfg.output_dir);
  outputs.write_with("data.csv", [&](const fs::path& p) { write_csv(ds, p); });
  write_manifest(outputs, "gen-data", args, &cfg, elapsed(start));
  out << "wrote " << (outputs.dir() / "data.csv").string() << ": " << ds.size() << " rows, "
      << ds.count(kPositive) << " minority\n";
  return kExitOk;
}

int cmd_split(const Command& c, const std::vector<std::string>& args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig cfg = resolve(c);
  const ExperimentConfig& e = cfg.experiment;
  const DatasetSplits splits = split_source(load_source(e.data), e.split, e.seed);
  const Dataset masked =
      e.label_rate >= 1.0 ? splits.train
                          : mask_labels(splits.train, {e.label_rate, mask_seed(e.seed, e.label_rate)});
  Outputs outputs(cfg.output_dir);
  const std::vector<std::pair<std::string, const Dataset*>> parts = {
      {"train.csv", &splits.train}, {"val.csv", &splits.val}, {"test.csv", &splits.test},
      {"train_masked.csv", &masked}};
  for (const auto& [name, ds] : parts) {
    outputs.write_with(name, [&](const fs::path& p) { write_csv(*ds, p); });
  }
  write_manifest(outputs, "split", args, &cfg, elapsed(start));
  out << "train " << splits.train.size() << ", val " << splits.val.size() << ", test "
      << splits.test.size() << ", labeled " << masked.labeled_count() << '\n';
  return kExitOk;
}

int cmd_run(const Command& c, const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig cfg = resolve(c);
  const ExperimentConfig& e = cfg.experiment;
  const std::string label = display_name(e.treatment, e.learner);
  const CellResult result = run_treatment(e, trial_progress(err, e.n_trials, label));

  Outputs outputs(cfg.output_dir);
  outputs.write("result.csv", results_to_csv({result.row}));
  outputs.write("history.csv", history_to_csv(result.space, result.history));
  outputs.write("model.json", model_to_json(result.model) + "\n");
  outputs.write("report.txt", tables_to_text(build_tables({result.row})));
  write_manifest(outputs, "run", args, &cfg, elapsed(start));
  const auto& g = result.row.metrics.g_measure;
  out << label << " at label rate " << format_double(e.label_rate) << ": test g-measure "
      << (g ? format_fixed(*g, 1) : std::string("NA")) << '\n';
  return kExitOk;
}

int cmd_sensitivity(const Command& c, const std::vector<std::string>& args, std::ostream& out,
                    std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig cfg = resolve(c);
  const std::size_t total = cfg.rates.size() * cfg.cells.size();
  std::size_t done = 0;
  const auto rows = sensitivity(cfg.experiment, cfg.rates, cfg.cells, cfg.jobs,
                                [&](const ResultRow& row) {
                                  const auto& g = row.metrics.g_measure;
                                  err << "cell " << ++done << "/" << total << " "
                                      << display_name(row.treatment, row.learner) << " rate "
                                      << format_double(row.label_rate) << " g "
                                      << (g ? format_fixed(*g, 1) : std::string("NA")) << '\n';
                                });
  const auto tables = build_tables(rows);
  Outputs outputs(cfg.output_dir);
  outputs.write("results.csv", results_to_csv(rows));
  outputs.write("tables.csv", tables_to_csv(tables));
  const std::string text = tables_to_text(tables);
  outputs.write("report.txt", text);
  write_manifest(outputs, "sensitivity", args, &cfg, elapsed(start));
  out << text;
  return kExitOk;
}

int cmd_probe(const Command& c, const std::vector<std::string>& args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig cfg = resolve(c);
  std::vector<Learner> learners{Learner::kPropagation, Learner::kSpreading};
  if (c.given("learner")) learners = {cfg.experiment.learner};
  const auto points = imbalance_probe(cfg.experiment, cfg.rates, learners);
  Outputs outputs(cfg.output_dir);
  const std::string csv = imbalance_to_csv(points);
  outputs.write("imbalance.csv", csv);
  write_manifest(outputs, "probe-imbalance", args, &cfg, elapsed(start));
  out << csv;
  return kExitOk;
}

int cmd_report(const Command& c, const std::vector<std::string>& args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<ResultRow> rows;
  for (const auto& path : c.results) {
    auto part = results_from_csv(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty()) throw ValidationError("--results: no result rows found");
  const auto tables = build_tables(rows);
  Outputs outputs(c.given("out") ? fs::path(c.out) : fs::path("out"));
  outputs.write("tables.csv", tables_to_csv(tables));
  const std::string text = tables_to_text(tables);
  outputs.write("report.txt", text);
  write_manifest(outputs, "report", args, nullptr, elapsed(start));
  out << text;
  return kExitOk;
}

int cmd_evaluate(const Command& c, const std::vector<std::string>& args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const ForestModel model = load_model(c.model);
  const Dataset ds = load_csv(c.data, c.label_column, c.positive_label);
  if (ds.dims() != model.dims) {
    throw ValidationError("--data has " + std::to_string(ds.dims()) + " features, the model expects " +
                          std::to_string(model.dims));
  }
  const MetricReport r = evaluate(model, ds);
  std::ostringstream csv;
  const auto& names = metric_names();
  const auto values = metric_values(r);
  for (std::size_t i = 0; i < names.size(); ++i) csv << (i ? "," : "") << names[i];
  csv << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    csv << (i ? "," : "") << (values[i] ? format_double(*values[i]) : "NA");
  }
  csv << '\n';
  Outputs outputs(c.given("out") ? fs::path(c.out) : fs::path("out"));
  outputs.write("metrics.csv", csv.str());
  write_manifest(outputs, "evaluate", args, nullptr, elapsed(start));
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << ' ' << (values[i] ? format_fixed(*values[i], 1) : "NA") << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semi-supervised pseudo-labeling, adaptive SMOTE and a random forest, tuned "
               "jointly by a TPE optimizer."};
  app.name("dapper");
  app.set_version_flag("--version", DAPPER_VERSION);
  app.require_subcommand(1, 1);
  app.footer(
      "Config files are JSON with sections data, synthetic, split, experiment and output.\n"
      "Each long flag sets the key of the same name (dashes as underscores) in its section;\n"
      "--data sets data.path and --out sets output.dir. Flags win over the config file.\n"
      "Exit codes: 0 success, 1 invalid flag, config or input, 2 runtime failure.");

  std::map<std::string, std::unique_ptr<Command>> commands;
  const auto make = [&](const std::string& name, const std::string& help, const std::string& footer) {
    auto c = std::make_unique<Command>();
    c->app = app.add_subcommand(name, help);
    c->app->footer(footer);
    Command* raw = c.get();
    commands[name] = std::move(c);
    return raw;
  };

  Command* gen = make("gen-data", "Generate a two-Gaussian synthetic dataset",
                      "Writes <out>/data.csv (features f0.. and label) and manifest.json.");
  add_config_flag(*gen);
  add_synthetic_flags(*gen);
  add_out_flag(*gen);

  Command* split = make("split", "Stratified train/validation/test split and label mask",
                        "Writes train.csv, val.csv, test.csv, train_masked.csv (hidden labels are "
                        "-1) and manifest.json.");
  add_source_flags(*split);
  split->add("label-rate", split->label_rate, "Share of training labels kept (experiment.label_rate)")
      ->check(interval(0.0, 1.0, true, false));

  Command* run_cmd = make("run", "Run one treatment at one label rate",
                          "Writes result.csv, history.csv (one line per trial), model.json, "
                          "report.txt and manifest.json.");
  add_source_flags(*run_cmd);
  run_cmd->add("treatment", run_cmd->treatment,
               "default, optimized_ssl_only or dapper (experiment.treatment)")
      ->check(CLI::IsMember({"default", "optimized_ssl_only", "optimized", "dapper"}));
  add_learner_flag(*run_cmd);
  run_cmd->add("label-rate", run_cmd->label_rate,
               "Share of training labels kept (experiment.label_rate, default 0.1)")
      ->check(interval(0.0, 1.0, true, false));
  add_experiment_flags(*run_cmd);

  Command* sens = make("sensitivity", "Grid of treatments and label rates",
                       "Writes results.csv (one row per cell), tables.csv, report.txt (one table "
                       "per metric) and manifest.json.");
  add_source_flags(*sens);
  sens->add("rates", sens->rates,
            "Label rates, start:stop:step or a comma list (experiment.rates, default 0.9:0.1:-0.1)");
  sens->add("treatments", sens->treatments,
            "all, or a comma list of treatment[:learner] (experiment.treatments, default all)");
  add_experiment_flags(*sens);
  sens->add("jobs", sens->jobs, "Grid cells run concurrently (experiment.jobs, default 1)")
      ->check(CLI::Range(1u, 1024u));

  Command* probe = make("probe-imbalance", "Minority share after default pseudo-labeling",
                        "Writes imbalance.csv (label_rate, learner, labeled_size, "
                        "minority_fraction) and manifest.json.");
  add_source_flags(*probe);
  probe->add("rates", probe->rates, "Label rates (experiment.rates, default 0.9:0.1:-0.1)");
  add_learner_flag(*probe);

  Command* rep = make("report", "Per-metric tables from result files",
                      "Writes tables.csv, report.txt and manifest.json. Best value per column is "
                      "marked with '*' (lowest for pf).");
  rep->add("results", rep->results, "result.csv or results.csv files")
      ->required()
      ->check(CLI::ExistingFile);
  add_out_flag(*rep);

  Command* ev = make("evaluate", "Score a saved model on a labeled CSV",
                     "Writes metrics.csv and manifest.json.");
  ev->add("model", ev->model, "model.json written by run")->required()->check(CLI::ExistingFile);
  ev->add("data", ev->data, "Labeled CSV")->required()->check(CLI::ExistingFile);
  ev->label_column = "label";
  ev->positive_label = "1";
  ev->add("label-column", ev->label_column, "Label column (default label)");
  ev->add("positive-label", ev->positive_label, "Positive label value (default 1)");
  add_out_flag(*ev);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    for (const auto& [name, c] : commands) {
      if (!c->app->parsed()) continue;
      if (name == "gen-data") return cmd_gen_data(*c, args, out);
      if (name == "split") return cmd_split(*c, args, out);
      if (name == "run") return cmd_run(*c, args, out, err);
      if (name == "sensitivity") return cmd_sensitivity(*c, args, out, err);
      if (name == "probe-imbalance") return cmd_probe(*c, args, out);
      if (name == "report") return cmd_report(*c, args, out);
      if (name == "evaluate") return cmd_evaluate(*c, args, out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace dapper::cli
