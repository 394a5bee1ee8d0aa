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
#include <string>
#include <string_view>
#include <vector>

#include "dapper/pipeline.hpp"

namespace dapper {

// Everything a CLI invocation can set. The JSON form has the sections
// data, synthetic, split, experiment and output; keys match the long flags
// with dashes replaced by underscores.
struct RunConfig {
  ExperimentConfig experiment;
  std::vector<double> rates;  // sensitivity grid and imbalance probe
  std::vector<Cell> cells;    // sensitivity grid
  std::filesystem::path output_dir = "out";
  unsigned jobs = 1;

  void validate() const;
};

// Rates 0.9 down to 0.1 and all six cells.
RunConfig default_run_config();

// Starts from default_run_config(); unknown keys are errors.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);

// "start:stop:step" (inclusive of stop), a comma list, or a single value.
std::vector<double> parse_rates(const std::string& text);
std::string format_rates(const std::vector<double>& rates);

// "all", or a comma list of "treatment[:learner]"; a bare treatment expands
// to both learners.
std::vector<Cell> parse_cells(const std::string& text);
std::string format_cells(const std::vector<Cell>& cells);

}  // namespace dapper
