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

#include "dapper/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dapper/error.hpp"
#include "dapper/io.hpp"

namespace dapper {
namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::optional<double> parse_optional(const std::string& text, std::size_t row, const std::string& col) {
  if (text == "NA" || text.empty()) return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || used == 0) {
    throw ParseError("row " + std::to_string(row) + ", column '" + col + "': '" + text +
                         "' is not a number",
                     row, 0);
  }
  return v;
}

std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::string rate_label(double rate) {
  const double pct = rate * 100.0;
  if (std::abs(pct - std::round(pct)) < 1e-9) return std::to_string(std::llround(pct)) + "%";
  return format_double(pct) + "%";
}

std::size_t cell_order(Treatment t, Learner l) {
  const auto cells = all_cells();
  return static_cast<std::size_t>(std::find(cells.begin(), cells.end(), Cell{t, l}) - cells.begin());
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"seed",   "treatment",     "learner",  "label_rate",
                                  "labeled_size", "trials", "smote_applied", "val_loss"};
    for (const auto& m : metric_names()) c.push_back(m);
    return c;
  }();
  return cols;
}

}  // namespace

std::string results_to_csv(const std::vector<ResultRow>& rows, bool include_wall_time) {
  std::ostringstream out;
  const auto& cols = result_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  if (include_wall_time) out << ",wall_time_s";
  out << '\n';
  for (const auto& r : rows) {
    out << r.seed << ',' << to_string(r.treatment) << ',' << to_string(r.learner) << ','
        << format_double(r.label_rate) << ',' << r.labeled_size << ',' << r.trials << ','
        << (r.smote_applied ? (*r.smote_applied ? "true" : "false") : "NA") << ','
        << optional_field(r.val_loss);
    for (const auto& v : metric_values(r.metrics)) out << ',' << optional_field(v);
    if (include_wall_time) out << ',' << format_fixed(r.wall_time_s, 3);
    out << '\n';
  }
  return out.str();
}

std::vector<ResultRow> results_from_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  std::vector<std::size_t> idx;
  for (const auto& c : result_columns()) {
    const auto it = std::find(table.header.begin(), table.header.end(), c);
    if (it == table.header.end()) {
      throw ParseError(path.string() + ": missing column '" + c + "'", 0, 0);
    }
    idx.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  std::vector<ResultRow> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::size_t line = r + 2;
    const auto field = [&](std::size_t k) { return f[idx[k]]; };
    const auto number = [&](std::size_t k) {
      const auto v = parse_optional(field(k), line, result_columns()[k]);
      if (!v) throw ParseError("row " + std::to_string(line) + ": '" + result_columns()[k] + "' is empty", line, idx[k]);
      return *v;
    };
    ResultRow row;
    try {
      row.seed = std::stoull(field(0));
      row.treatment = parse_treatment(field(1));
      row.learner = parse_learner(field(2));
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("row " + std::to_string(line) + ": bad seed '" + field(0) + "'", line, idx[0]);
    }
    row.label_rate = number(3);
    row.labeled_size = static_cast<std::size_t>(number(4));
    row.trials = static_cast<std::size_t>(number(5));
    if (field(6) == "true") row.smote_applied = true;
    if (field(6) == "false") row.smote_applied = false;
    row.val_loss = parse_optional(field(7), line, "val_loss");
    std::vector<std::optional<double>> m;
    for (std::size_t k = 8; k < result_columns().size(); ++k) {
      m.push_back(parse_optional(field(k), line, result_columns()[k]));
    }
    row.metrics = {m[0], m[1], m[2], m[3], m[4], m[5]};
    rows.push_back(row);
  }
  return rows;
}

std::string imbalance_to_csv(const std::vector<ImbalancePoint>& points) {
  std::ostringstream out;
  out << "label_rate,learner,labeled_size,minority_fraction\n";
  for (const auto& p : points) {
    out << format_double(p.label_rate) << ',' << to_string(p.learner) << ',' << p.labeled_size
        << ',' << format_double(p.minority_fraction) << '\n';
  }
  return out.str();
}

std::vector<MetricTable> build_tables(const std::vector<ResultRow>& rows) {
  std::vector<std::pair<Treatment, Learner>> cells;
  std::vector<double> rates;
  for (const auto& r : rows) {
    if (std::find(cells.begin(), cells.end(), std::pair{r.treatment, r.learner}) == cells.end()) {
      cells.emplace_back(r.treatment, r.learner);
    }
    if (std::find(rates.begin(), rates.end(), r.label_rate) == rates.end()) rates.push_back(r.label_rate);
  }
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
    return cell_order(a.first, a.second) < cell_order(b.first, b.second);
  });
  std::sort(rates.begin(), rates.end(), std::greater<>());

  std::vector<MetricTable> tables;
  const auto& names = metric_names();
  for (std::size_t m = 0; m < names.size(); ++m) {
    MetricTable t;
    t.metric = names[m];
    t.rates = rates;
    for (const auto& [tr, le] : cells) {
      t.row_names.push_back(display_name(tr, le));
      std::vector<std::optional<double>> line;
      for (double rate : rates) {
        std::vector<double> vals;
        for (const auto& r : rows) {
          if (r.treatment != tr || r.learner != le || r.label_rate != rate) continue;
          if (const auto v = metric_values(r.metrics)[m]) vals.push_back(*v);
        }
        line.push_back(median(std::move(vals)));
      }
      t.values.push_back(std::move(line));
    }
    const bool lower_better = t.metric == "pf";
    t.best.assign(t.values.size(), std::vector<bool>(rates.size(), false));
    for (std::size_t c = 0; c < rates.size(); ++c) {
      std::optional<double> best;
      for (const auto& line : t.values) {
        if (!line[c]) continue;
        if (!best || (lower_better ? *line[c] < *best : *line[c] > *best)) best = line[c];
      }
      for (std::size_t r = 0; r < t.values.size(); ++r) {
        t.best[r][c] = best && t.values[r][c] && *t.values[r][c] == *best;
      }
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

std::string tables_to_csv(const std::vector<MetricTable>& tables) {
  std::ostringstream out;
  out << "metric,treatment,label_rate,value,best\n";
  for (const auto& t : tables) {
    for (std::size_t r = 0; r < t.row_names.size(); ++r) {
      for (std::size_t c = 0; c < t.rates.size(); ++c) {
        out << t.metric << ',' << csv_field(t.row_names[r]) << ',' << format_double(t.rates[c]) << ','
            << optional_field(t.values[r][c]) << ',' << (t.best[r][c] ? "true" : "false") << '\n';
      }
    }
  }
  return out.str();
}

std::string tables_to_text(const std::vector<MetricTable>& tables) {
  std::ostringstream out;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    const auto& t = tables[k];
    std::vector<std::vector<std::string>> grid;
    grid.push_back({"Treatment"});
    for (double r : t.rates) grid[0].push_back(rate_label(r) + " ");
    for (std::size_t r = 0; r < t.row_names.size(); ++r) {
      std::vector<std::string> line{t.row_names[r]};
      for (std::size_t c = 0; c < t.rates.size(); ++c) {
        std::string cell = t.values[r][c] ? format_fixed(*t.values[r][c], 1) : "NA";
        line.push_back(cell + (t.best[r][c] ? "*" : " "));
      }
      grid.push_back(std::move(line));
    }
    std::vector<std::size_t> width(grid[0].size(), 0);
    for (const auto& line : grid) {
      for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    }
    if (k) out << '\n';
    out << t.metric << '\n';
    for (const auto& line : grid) {
      std::string text = line[0] + std::string(width[0] - line[0].size(), ' ');
      for (std::size_t c = 1; c < line.size(); ++c) {
        text += "  " + std::string(width[c] - line[c].size(), ' ') + line[c];
      }
      while (!text.empty() && text.back() == ' ') text.pop_back();
      out << text << '\n';
    }
  }
  return out.str();
}

}  // namespace dapper
