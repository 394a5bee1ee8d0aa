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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dapper/dataset.hpp"

namespace dapper {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// All rates on the 0-100 scale. An empty optional marks a metric whose
// denominator was zero.
struct MetricReport {
  std::optional<double> recall;     // pd
  std::optional<double> pf;         // false positive rate
  std::optional<double> g_measure;  // harmonic mean of pd and 100 - pf
  std::optional<double> precision;
  std::optional<double> f1;
  std::optional<double> auc;

  bool operator==(const MetricReport&) const = default;
};

// Class 1 is the positive class.
ConfusionCounts confusion(std::span<const Label> y_true, std::span<const Label> y_pred);

MetricReport compute_metrics(const ConfusionCounts& c);

// 2 * pd * (100 - pf) / (pd + 100 - pf); undefined when both terms are zero.
std::optional<double> g_measure(double pd, double pf);

// Mann-Whitney statistic with average ranks for ties, in [0, 1]. Empty when
// y_true holds a single class.
std::optional<double> auc_roc(std::span<const Label> y_true, std::span<const double> scores);

// Loss minimized by the optimizer: (100 - g) / 100, or 1 when g is undefined.
double loss_from_report(const MetricReport& report);

// Column names and values in the order used by every metrics CSV.
const std::vector<std::string>& metric_names();
std::vector<std::optional<double>> metric_values(const MetricReport& report);

}  // namespace dapper
