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

#include <gtest/gtest.h>

#include "dapper/error.hpp"
#include "dapper/report.hpp"
#include "helpers.hpp"

namespace dapper {
namespace {

ResultRow row(Treatment t, Learner l, double rate, double pd, double pf) {
  ResultRow r;
  r.treatment = t;
  r.learner = l;
  r.label_rate = rate;
  r.metrics = compute_metrics({0, 0, 0, 0});
  r.metrics.recall = pd;
  r.metrics.pf = pf;
  r.metrics.g_measure = g_measure(pd, pf);
  r.metrics.auc = 90.0;
  r.labeled_size = 320;
  r.trials = t == Treatment::kDefault ? 0 : 100;
  r.seed = 7;
  if (t != Treatment::kDefault) r.val_loss = 0.125;
  r.smote_applied = t == Treatment::kDapper;
  return r;
}

TEST(ResultsCsv, RoundTrip) {
  const std::vector<ResultRow> rows{row(Treatment::kDapper, Learner::kSpreading, 0.1, 85.4, 9.7),
                                    row(Treatment::kDefault, Learner::kPropagation, 0.9, 20, 1)};
  const std::string csv = results_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "seed,treatment,learner,label_rate,labeled_size,trials,smote_applied,val_loss,recall,pf,"
            "g_measure,precision,f1,auc");
  EXPECT_EQ(csv.find("wall_time_s"), std::string::npos);
  testing::TempDir dir;
  testing::write_text(dir / "r.csv", csv);
  const auto back = results_from_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(results_to_csv(back), csv);
  EXPECT_EQ(back[0].metrics, rows[0].metrics);
  EXPECT_FALSE(back[1].val_loss);
  EXPECT_NE(results_to_csv(rows, true).find(",wall_time_s\n"), std::string::npos);
}

TEST(ResultsCsv, CorruptFiles) {
  testing::TempDir dir;
  testing::write_text(dir / "a.csv", "seed,treatment\n1,dapper\n");
  EXPECT_THROW(results_from_csv(dir / "a.csv"), ParseError);
  std::string csv = results_to_csv({row(Treatment::kDapper, Learner::kSpreading, 0.1, 85.4, 9.7)});
  csv.replace(csv.find("0.1,"), 4, "abc,");
  testing::write_text(dir / "b.csv", csv);
  EXPECT_THROW(results_from_csv(dir / "b.csv"), ValidationError);
}

TEST(Tables, OneRowGivesOneCell) {
  const auto tables = build_tables({row(Treatment::kDapper, Learner::kPropagation, 0.1, 85.4, 9.7)});
  ASSERT_EQ(tables.size(), 6u);
  EXPECT_EQ(tables[2].metric, "g_measure");
  ASSERT_EQ(tables[2].values.size(), 1u);
  ASSERT_EQ(tables[2].values[0].size(), 1u);
  EXPECT_TRUE(tables[2].best[0][0]);
  EXPECT_FALSE(tables[3].values[0][0]);
  EXPECT_FALSE(tables[3].best[0][0]);
}

TEST(Tables, BestMarkedOnHigherG) {
  const std::vector<ResultRow> rows{row(Treatment::kDefault, Learner::kSpreading, 0.1, 40, 2),
                                    row(Treatment::kDapper, Learner::kSpreading, 0.1, 85, 10)};
  const auto t = build_tables(rows);
  EXPECT_EQ(t[2].row_names, (std::vector<std::string>{"Default LS", "Dapper + LS"}));
  EXPECT_FALSE(t[2].best[0][0]);
  EXPECT_TRUE(t[2].best[1][0]);
  // lower is better for pf
  EXPECT_TRUE(t[1].best[0][0]);
  EXPECT_FALSE(t[1].best[1][0]);
  const std::string text = tables_to_text(t);
  EXPECT_NE(text.find("Dapper + LS  "), std::string::npos);
  EXPECT_NE(text.find("*"), std::string::npos);
}

TEST(Tables, CanonicalOrderMedianAndText) {
  std::vector<ResultRow> rows;
  for (double rate : {0.1, 0.9}) {
    rows.push_back(row(Treatment::kDapper, Learner::kSpreading, rate, 80, 10));
    rows.push_back(row(Treatment::kDefault, Learner::kPropagation, rate, 50, 10));
  }
  ResultRow extra = row(Treatment::kDapper, Learner::kSpreading, 0.1, 60, 10);
  extra.seed = 8;
  rows.push_back(extra);
  rows.push_back(row(Treatment::kDapper, Learner::kSpreading, 0.1, 70, 10));
  const auto t = build_tables(rows);
  EXPECT_EQ(t[0].row_names, (std::vector<std::string>{"Default LP", "Dapper + LS"}));
  EXPECT_EQ(t[0].rates, (std::vector<double>{0.9, 0.1}));
  EXPECT_EQ(*t[0].values[1][1], 70.0);
  EXPECT_EQ(tables_to_text(t).substr(0, 57),
            "recall\n"
            "Treatment     90%    10%\n"
            "Default LP   50.0   50.0\n");
  const std::string csv = tables_to_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "metric,treatment,label_rate,value,best");
  EXPECT_NE(csv.find("recall,Dapper + LS,0.1,70,true\n"), std::string::npos);
}

TEST(Tables, ByteStable) {
  std::vector<ResultRow> rows;
  for (const Cell& c : all_cells()) {
    for (double rate : {0.9, 0.5, 0.1}) rows.push_back(row(c.treatment, c.learner, rate, 60 + rate * 10, 5));
  }
  const auto a = build_tables(rows);
  const auto b = build_tables(rows);
  EXPECT_EQ(tables_to_text(a), tables_to_text(b));
  EXPECT_EQ(tables_to_csv(a), tables_to_csv(b));
}

TEST(ImbalanceCsv, Layout) {
  EXPECT_EQ(imbalance_to_csv({{0.1, Learner::kSpreading, 0.0125, 320}}),
            "label_rate,learner,labeled_size,minority_fraction\n0.1,spreading,320,0.0125\n");
}

}  // namespace
}  // namespace dapper
