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

#include "dapper/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "dapper/error.hpp"
#include "dapper/io.hpp"

namespace dapper {
namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw ValidationError(what + ": '" + text + "' is not a number");
  }
  return v;
}

// Ten decimals removes accumulation noise such as 0.30000000000000004.
double tidy(double v) { return std::round(v * 1e10) / 1e10; }

class Section {
 public:
  Section(const json& root, const std::string& name) : name_(name) {
    if (!root.contains(name)) return;
    node_ = &root.at(name);
    if (!node_->is_object()) throw ValidationError("config section '" + name + "' must be an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    known_.push_back(key);
    if (!node_ || !node_->contains(key)) return;
    try {
      out = node_->at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError("config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (std::find(known_.begin(), known_.end(), key) == known_.end()) {
        throw ValidationError("unknown config key '" + name_ + "." + key + "'");
      }
    }
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::vector<std::string> known_;
};

}  // namespace

void RunConfig::validate() const {
  experiment.validate();
  if (rates.empty()) throw ValidationError("rates must list at least one label rate");
  for (double r : rates) {
    if (!(r > 0.0 && r <= 1.0)) {
      throw ValidationError("rates: " + format_double(r) + " is outside (0, 1]");
    }
  }
  if (cells.empty()) throw ValidationError("treatments must name at least one treatment");
  if (jobs < 1) throw ValidationError("jobs must be at least 1");
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.rates = parse_rates("0.9:0.1:-0.1");
  cfg.cells = all_cells();
  return cfg;
}

RunConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0, 0);
  }
  if (!root.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : root.items()) {
    if (key != "data" && key != "synthetic" && key != "split" && key != "experiment" &&
        key != "output") {
      throw ValidationError("unknown config section '" + key + "'");
    }
  }

  RunConfig cfg = default_run_config();
  ExperimentConfig& e = cfg.experiment;

  Section data(root, "data");
  std::string path;
  data.read("path", path);
  if (!path.empty()) e.data.path = path;
  data.read("label_column", e.data.label_column);
  data.read("positive_label", e.data.positive_label);
  data.finish();

  Section synth(root, "synthetic");
  synth.read("rows", e.data.synthetic.n);
  synth.read("dims", e.data.synthetic.d);
  synth.read("minority_fraction", e.data.synthetic.minority_fraction);
  synth.read("separation", e.data.synthetic.separation);
  synth.read("data_seed", e.data.synthetic.seed);
  synth.finish();

  Section split(root, "split");
  split.read("train_frac", e.split.train_frac);
  split.read("val_frac", e.split.val_frac);
  split.read("test_frac", e.split.test_frac);
  split.finish();

  Section exp(root, "experiment");
  std::string treatment, learner, rates, treatments;
  exp.read("treatment", treatment);
  exp.read("learner", learner);
  exp.read("label_rate", e.label_rate);
  exp.read("rates", rates);
  exp.read("treatments", treatments);
  if (!treatment.empty()) e.treatment = parse_treatment(treatment);
  if (!learner.empty()) e.learner = parse_learner(learner);
  if (!rates.empty()) cfg.rates = parse_rates(rates);
  if (!treatments.empty()) cfg.cells = parse_cells(treatments);
  exp.read("threshold", e.imbalance_threshold);
  exp.read("trials", e.n_trials);
  exp.read("seed", e.seed);
  exp.read("smote_cap", e.smote_cap);
  exp.read("threads", e.forest_threads);
  exp.read("jobs", cfg.jobs);
  exp.finish();

  Section output(root, "output");
  std::string dir;
  output.read("dir", dir);
  if (!dir.empty()) cfg.output_dir = dir;
  output.finish();

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string config_to_json(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  json root;
  root["data"] = {{"path", e.data.path ? e.data.path->string() : ""},
                  {"label_column", e.data.label_column},
                  {"positive_label", e.data.positive_label}};
  root["synthetic"] = {{"rows", e.data.synthetic.n},
                       {"dims", e.data.synthetic.d},
                       {"minority_fraction", e.data.synthetic.minority_fraction},
                       {"separation", e.data.synthetic.separation},
                       {"data_seed", e.data.synthetic.seed}};
  root["split"] = {{"train_frac", e.split.train_frac},
                   {"val_frac", e.split.val_frac},
                   {"test_frac", e.split.test_frac}};
  root["experiment"] = {{"treatment", to_string(e.treatment)},
                        {"learner", to_string(e.learner)},
                        {"label_rate", e.label_rate},
                        {"rates", format_rates(cfg.rates)},
                        {"treatments", format_cells(cfg.cells)},
                        {"threshold", e.imbalance_threshold},
                        {"trials", e.n_trials},
                        {"seed", e.seed},
                        {"smote_cap", e.smote_cap},
                        {"threads", e.forest_threads},
                        {"jobs", cfg.jobs}};
  root["output"] = {{"dir", cfg.output_dir.string()}};
  return root.dump(2) + "\n";
}

std::vector<double> parse_rates(const std::string& text) {
  const auto parts = split_list(text, ':');
  std::vector<double> out;
  if (parts.size() == 3) {
    const double start = parse_number(parts[0], "rates");
    const double stop = parse_number(parts[1], "rates");
    const double step = parse_number(parts[2], "rates");
    if (step == 0.0 || (stop - start) * step < 0.0) {
      throw ValidationError("rates: step " + parts[2] + " does not lead from " + parts[0] +
                            " to " + parts[1]);
    }
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 10000) throw ValidationError("rates: range has too many values");
    for (std::size_t i = 0; i < count; ++i) out.push_back(tidy(start + static_cast<double>(i) * step));
  } else if (parts.size() == 1) {
    for (const auto& item : split_list(text, ',')) out.push_back(parse_number(item, "rates"));
  } else {
    throw ValidationError("rates: expected start:stop:step or a comma list, got '" + text + "'");
  }
  for (double r : out) {
    if (!(r > 0.0 && r <= 1.0)) throw ValidationError("rates: " + format_double(r) + " is outside (0, 1]");
  }
  return out;
}

std::string format_rates(const std::vector<double>& rates) {
  std::string out;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (i) out += ',';
    out += format_double(rates[i]);
  }
  return out;
}

std::vector<Cell> parse_cells(const std::string& text) {
  if (text == "all") return all_cells();
  std::vector<Cell> out;
  for (const auto& item : split_list(text, ',')) {
    const auto colon = item.find(':');
    const Treatment t = parse_treatment(item.substr(0, colon));
    if (colon == std::string::npos) {
      out.push_back({t, Learner::kPropagation});
      out.push_back({t, Learner::kSpreading});
    } else {
      out.push_back({t, parse_learner(item.substr(colon + 1))});
    }
  }
  return out;
}

std::string format_cells(const std::vector<Cell>& cells) {
  if (cells == all_cells()) return "all";
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += to_string(cells[i].treatment) + ":" + to_string(cells[i].learner);
  }
  return out;
}

}  // namespace dapper
