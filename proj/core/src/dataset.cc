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

#include "dapper/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dapper/error.hpp"
#include "dapper/io.hpp"
#include "dapper/random.hpp"

namespace dapper {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Largest-remainder apportionment of `total` across `weights`; ties go to the
// lower index.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& weights,
                                   std::size_t total) {
  const double sum = static_cast<double>(
      std::accumulate(weights.begin(), weights.end(), std::size_t{0}));
  std::vector<std::size_t> alloc(weights.size(), 0);
  std::vector<double> remainder(weights.size(), 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double ideal = static_cast<double>(total) * static_cast<double>(weights[i]) / sum;
    alloc[i] = static_cast<std::size_t>(std::floor(ideal + 1e-9));
    remainder[i] = ideal - static_cast<double>(alloc[i]);
    assigned += alloc[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
    if (alloc[order[k]] < weights[order[k]]) {
      ++alloc[order[k]];
      ++assigned;
    }
  }
  return alloc;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

std::array<std::vector<std::size_t>, 2> rows_by_class(const Dataset& ds) {
  std::array<std::vector<std::size_t>, 2> out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] != kUnlabeled) out[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  }
  return out;
}

std::size_t ceil_count(double x) {
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

}  // namespace

std::size_t Dataset::count(Label label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void Dataset::validate() const {
  if (features.rows() != labels.size()) {
    throw ValidationError("dataset has " + std::to_string(features.rows()) + " rows but " +
                          std::to_string(labels.size()) + " labels");
  }
  if (!row_ids.empty() && row_ids.size() != labels.size()) {
    throw ValidationError("dataset row_ids length does not match row count");
  }
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t j = 0; j < features.cols(); ++j) {
      if (!std::isfinite(features(i, j))) {
        throw ValidationError("non-finite feature at row " + std::to_string(i) +
                              ", column " + std::to_string(j));
      }
    }
  }
  for (Label l : labels) {
    if (l != kUnlabeled && l != kNegative && l != kPositive) {
      throw ValidationError("label " + std::to_string(l) + " is not in {-1, 0, 1}");
    }
  }
}

Dataset Dataset::select(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.features = features.select_rows(indices);
  out.labels.reserve(indices.size());
  out.row_ids.reserve(indices.size());
  for (std::size_t i : indices) {
    out.labels.push_back(labels[i]);
    out.row_ids.push_back(row_ids.empty() ? i : row_ids[i]);
  }
  out.feature_names = feature_names;
  out.class_names = class_names;
  return out;
}

Dataset concatenate(const Dataset& a, const Dataset& b) {
  if (a.size() > 0 && b.size() > 0 && a.dims() != b.dims()) {
    throw ValidationError("cannot concatenate datasets with different column counts");
  }
  Dataset out = a;
  if (out.size() == 0 && out.features.cols() == 0) out.features = Matrix(0, b.dims());
  out.features.reserve_rows(a.size() + b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    out.features.append_row(b.features.row(i));
    out.labels.push_back(b.labels[i]);
    out.row_ids.push_back(b.row_ids.empty() ? kSyntheticRow : b.row_ids[i]);
  }
  if (out.feature_names.empty()) out.feature_names = b.feature_names;
  return out;
}

void SplitSpec::validate() const {
  for (double f : {train_frac, val_frac, test_frac}) {
    if (!(f > 0.0 && f < 1.0)) {
      throw ValidationError("split fractions must each lie in (0, 1)");
    }
  }
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw ValidationError("split fractions must sum to 1");
  }
}

void LabelRate::validate() const {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw ValidationError("label rate must lie in (0, 1]");
  }
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::string& positive_label) {
  const CsvTable table = read_csv(path);
  if (table.rows.empty()) {
    throw ValidationError("'" + path.string() + "' has a header but no data rows");
  }
  const std::size_t label_idx = table.column(label_column);
  Dataset ds;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j != label_idx) ds.feature_names.push_back(table.header[j]);
  }
  ds.features = Matrix(0, ds.feature_names.size());
  ds.features.reserve_rows(table.rows.size());
  std::vector<double> row(ds.feature_names.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    std::size_t k = 0;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j == label_idx) continue;
      const std::string_view cell = trim(fields[j]);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() ||
          !std::isfinite(value)) {
        throw ParseError("row " + std::to_string(r + 1) + ", column '" + table.header[j] +
                             "': '" + std::string(cell) + "' is not a finite number",
                         r + 1, j);
      }
      row[k++] = value;
    }
    ds.features.append_row(row);
    ds.labels.push_back(trim(fields[label_idx]) == positive_label ? kPositive : kNegative);
    ds.row_ids.push_back(r);
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ostringstream out;
  for (std::size_t j = 0; j < ds.dims(); ++j) {
    out << csv_field(j < ds.feature_names.size() ? ds.feature_names[j]
                                                 : "f" + std::to_string(j))
        << ',';
  }
  out << "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features.row(i)) out << format_double(v) << ',';
    out << ds.labels[i] << '\n';
  }
  write_file_atomic(path, out.str());
}

DatasetSplits stratified_split(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  if (!ds.fully_labeled()) throw ValidationError("stratified_split needs a fully labeled dataset");
  auto by_class = rows_by_class(ds);
  for (std::size_t c = 0; c < 2; ++c) {
    if (by_class[c].size() < 3) {
      throw ValidationError("class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) +
                            " rows; a three-way split needs at least 3");
    }
  }
  const std::size_t n = ds.size();
  const std::size_t n_test = ceil_count(spec.test_frac * static_cast<double>(n));
  const std::size_t n_val = ceil_count(spec.val_frac / (spec.train_frac + spec.val_frac) *
                                       static_cast<double>(n - n_test));

  std::vector<std::size_t> class_sizes = {by_class[0].size(), by_class[1].size()};
  const auto test_alloc = apportion(class_sizes, n_test);
  std::vector<std::size_t> remaining = {class_sizes[0] - test_alloc[0],
                                        class_sizes[1] - test_alloc[1]};
  const auto val_alloc = apportion(remaining, n_val);

  Rng rng = make_rng(spec.seed, "stratified_split");
  std::vector<std::size_t> train_idx, val_idx, test_idx;
  for (std::size_t c = 0; c < 2; ++c) {
    auto rows = by_class[c];
    shuffle(rows, rng);
    const auto test_end = rows.begin() + static_cast<std::ptrdiff_t>(test_alloc[c]);
    const auto val_end = test_end + static_cast<std::ptrdiff_t>(val_alloc[c]);
    test_idx.insert(test_idx.end(), rows.begin(), test_end);
    val_idx.insert(val_idx.end(), test_end, val_end);
    train_idx.insert(train_idx.end(), val_end, rows.end());
  }
  for (auto* part : {&train_idx, &val_idx, &test_idx}) std::sort(part->begin(), part->end());
  return {ds.select(train_idx), ds.select(val_idx), ds.select(test_idx)};
}

std::size_t labeled_target(std::size_t n, double rate) {
  return std::min(n, static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9)));
}

Dataset mask_labels(const Dataset& train, const LabelRate& rate) {
  rate.validate();
  if (!train.fully_labeled()) throw ValidationError("mask_labels needs a fully labeled dataset");
  auto by_class = rows_by_class(train);
  for (std::size_t c = 0; c < 2; ++c) {
    if (by_class[c].empty()) {
      throw ValidationError("class " + std::to_string(c) +
                            " has no rows; cannot keep a labeled row for it");
    }
  }
  const std::size_t target = std::max<std::size_t>(2, labeled_target(train.size(), rate.rate));
  auto alloc = apportion({by_class[0].size(), by_class[1].size()}, target);
  for (std::size_t c = 0; c < 2; ++c) {
    if (alloc[c] == 0) {
      alloc[c] = 1;
      --alloc[1 - c];
    }
  }
  Dataset out = train;
  std::fill(out.labels.begin(), out.labels.end(), kUnlabeled);
  Rng rng = make_rng(rate.seed, "mask_labels");
  for (std::size_t c = 0; c < 2; ++c) {
    auto rows = by_class[c];
    shuffle(rows, rng);
    for (std::size_t k = 0; k < alloc[c]; ++k) out.labels[rows[k]] = train.labels[rows[k]];
  }
  return out;
}

Dataset synth_generate(std::size_t n, std::size_t d, double minority_frac, double separation,
                       std::uint64_t seed) {
  if (n == 0) throw ValidationError("synthetic row count must be positive");
  if (d < 2) throw ValidationError("synthetic dimension must be at least 2");
  if (!(minority_frac > 0.0 && minority_frac < 0.5)) {
    throw ValidationError("minority fraction must lie in (0, 0.5)");
  }
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw ValidationError("separation must be a finite non-negative number");
  }
  const auto n_minority =
      static_cast<std::size_t>(std::llround(minority_frac * static_cast<double>(n)));
  Rng rng = make_rng(seed, "synth_generate");
  Dataset ds;
  ds.labels.assign(n, kNegative);
  std::fill(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(n_minority),
            kPositive);
  for (std::size_t i = n; i > 1; --i) std::swap(ds.labels[i - 1], ds.labels[uniform_index(rng, i)]);

  const double shift = separation / std::sqrt(static_cast<double>(d));
  ds.features = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      ds.features(i, j) = standard_normal(rng) + (ds.labels[i] == kPositive ? shift : 0.0);
    }
  }
  ds.row_ids.resize(n);
  std::iota(ds.row_ids.begin(), ds.row_ids.end(), std::size_t{0});
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  return ds;
}

double minority_fraction(const Dataset& ds) {
  const double c0 = static_cast<double>(ds.count(kNegative));
  const double c1 = static_cast<double>(ds.count(kPositive));
  if (c0 + c1 == 0.0) throw ValidationError("minority_fraction needs at least one labeled row");
  return std::min(c0, c1) / (c0 + c1);
}

Label minority_label(const Dataset& ds) {
  return ds.count(kNegative) < ds.count(kPositive) ? kNegative : kPositive;
}

}  // namespace dapper
