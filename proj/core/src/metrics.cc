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

#include "dapper/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "dapper/error.hpp"

namespace dapper {

ConfusionCounts confusion(std::span<const Label> y_true, std::span<const Label> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ValidationError("confusion: " + std::to_string(y_true.size()) + " truths vs " +
                          std::to_string(y_pred.size()) + " predictions");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const Label t = y_true[i], p = y_pred[i];
    if ((t != kNegative && t != kPositive) || (p != kNegative && p != kPositive)) {
      throw ValidationError("confusion: labels must be 0 or 1 (row " + std::to_string(i) + ")");
    }
    if (t == kPositive) {
      (p == kPositive ? c.tp : c.fn) += 1;
    } else {
      (p == kPositive ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

std::optional<double> g_measure(double pd, double pf) {
  const double spec = 100.0 - pf;
  if (pd + spec == 0.0) return std::nullopt;
  return 2.0 * pd * spec / (pd + spec);
}

MetricReport compute_metrics(const ConfusionCounts& c) {
  MetricReport r;
  const auto pct = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  r.recall = pct(c.tp, c.tp + c.fn);
  r.pf = pct(c.fp, c.fp + c.tn);
  r.precision = pct(c.tp, c.tp + c.fp);
  if (r.recall && r.pf) r.g_measure = g_measure(*r.recall, *r.pf);
  if (r.recall && r.precision && *r.recall + *r.precision > 0.0) {
    r.f1 = 2.0 * *r.recall * *r.precision / (*r.recall + *r.precision);
  } else if (r.recall && r.precision) {
    r.f1 = 0.0;
  }
  return r;
}

std::optional<double> auc_roc(std::span<const Label> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) {
    throw ValidationError("auc_roc: label and score lengths differ");
  }
  const std::size_t n = y_true.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) {
      const Label t = y_true[order[k]];
      if (t != kNegative && t != kPositive) throw ValidationError("auc_roc: labels must be 0 or 1");
      if (t == kPositive) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double np = static_cast<double>(positives);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(negatives));
}

double loss_from_report(const MetricReport& report) {
  if (!report.g_measure) return 1.0;
  return std::clamp((100.0 - *report.g_measure) / 100.0, 0.0, 1.0);
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"recall", "pf",  "g_measure",
                                                 "precision", "f1", "auc"};
  return names;
}

std::vector<std::optional<double>> metric_values(const MetricReport& r) {
  return {r.recall, r.pf, r.g_measure, r.precision, r.f1, r.auc};
}

}  // namespace dapper
