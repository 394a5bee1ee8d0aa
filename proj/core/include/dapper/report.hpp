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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dapper/pipeline.hpp"

namespace dapper {

// Columns: seed, treatment, learner, label_rate, labeled_size, trials,
// smote_applied, val_loss, the metrics, then wall_time_s if requested.
// Without wall time the text depends only on config and seed.
std::string results_to_csv(const std::vector<ResultRow>& rows, bool include_wall_time = false);
std::vector<ResultRow> results_from_csv(const std::filesystem::path& path);

std::string imbalance_to_csv(const std::vector<ImbalancePoint>& points);

// Treatments as rows (report order), label rates as columns (descending).
// Several rows for one cell (different seeds) are summarized by their median.
struct MetricTable {
  std::string metric;
  std::vector<std::string> row_names;
  std::vector<double> rates;
  std::vector<std::vector<std::optional<double>>> values;
  std::vector<std::vector<bool>> best;  // per column maximum, minimum for pf
};

std::vector<MetricTable> build_tables(const std::vector<ResultRow>& rows);

// Long form: metric, treatment, label_rate, value, best.
std::string tables_to_csv(const std::vector<MetricTable>& tables);
// One aligned block per metric; best cells carry a trailing '*'.
std::string tables_to_text(const std::vector<MetricTable>& tables);

}  // namespace dapper
