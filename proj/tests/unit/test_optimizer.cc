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

#include <algorithm>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "dapper/error.hpp"
#include "dapper/optimizer.hpp"
#include "dapper/pipeline.hpp"

namespace dapper {
namespace {

ParamSpace kernel_space() {
  ParamSpace s;
  s.add(Dimension::categorical("kernel", {"rbf", "knn"}));
  s.add(Dimension::real("gamma", 10, 30, Condition{"kernel", {"rbf"}}));
  s.add(Dimension::integer("n_neighbors", 5, 15, Condition{"kernel", {"knn"}}));
  return s;
}

TrialRecord record(std::size_t i, HyperparamSample s, double loss) {
  TrialRecord r;
  r.index = i;
  r.sample = std::move(s);
  r.loss = loss;
  return r;
}

TEST(ParamSpace, Validation) {
  ParamSpace s;
  s.add(Dimension::real("x", 0, 1));
  EXPECT_THROW(s.add(Dimension::real("x", 0, 1)), ValidationError);
  EXPECT_THROW(s.add(Dimension::real("", 0, 1)), ValidationError);
  EXPECT_THROW(s.add(Dimension::real("y", 2, 1)), ValidationError);
  EXPECT_THROW(s.add(Dimension::categorical("c", {})), ValidationError);
  EXPECT_THROW(s.add(Dimension::real("z", 0, 1, Condition{"x", {"a"}})), ValidationError);
  EXPECT_THROW(s.add(Dimension::real("z", 0, 1, Condition{"later", {"a"}})), ValidationError);
  s.add(Dimension::categorical("c", {"a", "b"}));
  EXPECT_THROW(s.add(Dimension::real("z", 0, 1, Condition{"c", {"q"}})), ValidationError);
  EXPECT_NO_THROW(s.add(Dimension::real("z", 0, 1, Condition{"c", {"a"}})));
}

TEST(ParamSpace, CheckRejectsBadSamples) {
  const ParamSpace s = kernel_space();
  HyperparamSample h;
  h.set("kernel", std::string("rbf"));
  EXPECT_THROW(s.check(h), ValidationError);
  h.set("gamma", 12.0);
  EXPECT_NO_THROW(s.check(h));
  h.set("n_neighbors", std::int64_t{7});
  EXPECT_THROW(s.check(h), ValidationError);
  HyperparamSample out;
  out.set("kernel", std::string("rbf"));
  out.set("gamma", 31.0);
  EXPECT_THROW(s.check(out), ValidationError);
  out.set("gamma", std::string("big"));
  EXPECT_THROW(s.check(out), ValidationError);
}

TEST(HyperparamSample, Getters) {
  HyperparamSample h;
  h.set("i", std::int64_t{3});
  h.set("r", 0.5);
  h.set("c", std::string("x"));
  EXPECT_EQ(h.get_int("i"), 3);
  EXPECT_EQ(h.get_real("i"), 3.0);
  EXPECT_EQ(h.get_real("r"), 0.5);
  EXPECT_EQ(h.get_string("c"), "x");
  EXPECT_THROW(h.get_int("r"), ValidationError);
  EXPECT_THROW(h.get_string("i"), ValidationError);
  EXPECT_THROW(h.get_real("missing"), ValidationError);
}

TEST(Sample, EmptySpaceThrows) {
  Rng rng(1);
  EXPECT_THROW(sample(ParamSpace{}, {}, rng), ValidationError);
}

TEST(SampleProperty, StartupDrawsRespectBoundsAndConditions) {
  for (Learner l : {Learner::kPropagation, Learner::kSpreading}) {
    const ParamSpace space = dapper_space(l);
    Rng rng(7);
    std::map<std::string, std::size_t> kernels;
    for (int i = 0; i < 10000; ++i) {
      const auto s = sample(space, {}, rng);
      ASSERT_NO_THROW(space.check(s));
      ++kernels[s.get_string("kernel")];
    }
    EXPECT_GT(kernels["rbf"], 4500u);
    EXPECT_GT(kernels["knn"], 4500u);
  }
}

TEST(SampleProperty, TpeDrawsRespectBoundsAndConditions) {
  const ParamSpace space = dapper_space(Learner::kSpreading);
  Rng rng(8);
  std::vector<TrialRecord> history;
  for (std::size_t i = 0; i < 40; ++i) {
    history.push_back(record(i, sample(space, {}, rng), std::fmod(0.37 * i, 1.0)));
  }
  for (int i = 0; i < 10000; ++i) ASSERT_NO_THROW(space.check(sample(space, history, rng)));
}

TEST(Sample, PrefersKernelOfGoodTrials) {
  const ParamSpace space = kernel_space();
  Rng fill(3);
  std::vector<TrialRecord> history;
  for (std::size_t i = 0; i < 40; ++i) {
    HyperparamSample s;
    const bool good = i % 2 == 0;
    s.set("kernel", std::string(good ? "rbf" : "knn"));
    if (good) {
      s.set("gamma", 10.0 + 20.0 * uniform01(fill));
    } else {
      s.set("n_neighbors", static_cast<std::int64_t>(5 + uniform_index(fill, 11)));
    }
    history.push_back(record(i, s, good ? 0.1 + 0.001 * i : 0.9));
  }
  std::size_t rbf = 0, uniform_rbf = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    rbf += sample(space, history, rng).get_string("kernel") == "rbf";
    Rng rng2(seed);
    uniform_rbf += sample(space, {}, rng2).get_string("kernel") == "rbf";
  }
  EXPECT_GT(rbf, 500u);
  EXPECT_GT(rbf, uniform_rbf + 200);
}

TEST(Optimize, IntegerModeNearMinimum) {
  ParamSpace space;
  space.add(Dimension::integer("x", 1, 20));
  const auto objective = [](const HyperparamSample& s, std::size_t) {
    TrialOutcome o;
    o.loss = std::abs(static_cast<double>(s.get_int("x")) - 7.0) / 20.0;
    return o;
  };
  // brute force over the landscape to locate the optimum
  std::int64_t argmin = 1;
  for (std::int64_t x = 1; x <= 20; ++x) {
    if (std::abs(x - 7) < std::abs(argmin - 7)) argmin = x;
  }
  std::map<std::int64_t, int> counts;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = optimize(objective, space, 60, seed);
    for (std::size_t i = 30; i < 60; ++i) ++counts[r.history[i].sample.get_int("x")];
  }
  const auto mode = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
                      return a.second < b.second;
                    })->first;
  EXPECT_LE(std::abs(mode - argmin), 1);
}

TEST(Optimize, QuadraticNearGridOptimum) {
  ParamSpace space;
  space.add(Dimension::real("x", 0, 1));
  const auto f = [](double x) { return (x - 0.3) * (x - 0.3); };
  double grid_best = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    if (f(i / 10000.0) < f(grid_best)) grid_best = i / 10000.0;
  }
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = optimize(
        [&](const HyperparamSample& s, std::size_t) {
          TrialOutcome o;
          o.loss = f(s.get_real("x"));
          return o;
        },
        space, 100, seed);
    hits += std::abs(r.best.sample.get_real("x") - grid_best) <= 0.05;
  }
  EXPECT_GE(hits, 9);
}

TEST(Optimize, ConstantObjectivePicksFirstTrial) {
  ParamSpace space;
  space.add(Dimension::real("x", 0, 1));
  const auto r = optimize([](const HyperparamSample&, std::size_t) { return TrialOutcome{0.4, {}, {}, ""}; },
                          space, 25, 1);
  EXPECT_EQ(r.best.index, 0u);
  EXPECT_EQ(r.history.size(), 25u);
}

TEST(Optimize, RunningMinimumIsMonotone) {
  const ParamSpace space = dapper_space(Learner::kPropagation);
  std::vector<double> best_seen;
  const auto r = optimize(
      [](const HyperparamSample& s, std::size_t) {
        TrialOutcome o;
        o.loss = s.get_real("max_iter") / 2000.0;
        return o;
      },
      space, 60, 3, {}, [&](const TrialRecord&, const TrialRecord& best) { best_seen.push_back(best.loss); });
  ASSERT_EQ(best_seen.size(), 60u);
  for (std::size_t i = 1; i < best_seen.size(); ++i) ASSERT_LE(best_seen[i], best_seen[i - 1]);
  EXPECT_EQ(r.best.loss, best_seen.back());
  for (std::size_t i = 0; i < r.history.size(); ++i) EXPECT_EQ(r.history[i].index, i);
}

TEST(Optimize, DeterministicPerSeed) {
  const ParamSpace space = dapper_space(Learner::kSpreading);
  const auto objective = [](const HyperparamSample& s, std::size_t) {
    TrialOutcome o;
    o.loss = std::fmod(s.get_real("smote_m") * 0.0137, 1.0);
    return o;
  };
  const auto a = optimize(objective, space, 40, 11);
  const auto b = optimize(objective, space, 40, 11);
  const auto c = optimize(objective, space, 40, 12);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].sample, b.history[i].sample);
    EXPECT_EQ(a.history[i].loss, b.history[i].loss);
  }
  EXPECT_EQ(history_to_csv(space, a.history, false), history_to_csv(space, b.history, false));
  EXPECT_NE(history_to_csv(space, a.history, false), history_to_csv(space, c.history, false));
}

TEST(Optimize, FailingTrialRecordsLossOne) {
  ParamSpace space;
  space.add(Dimension::real("x", 0, 1));
  const auto r = optimize(
      [](const HyperparamSample& s, std::size_t trial) {
        if (trial == 2) throw Error("isolated node 4 has zero total affinity");
        TrialOutcome o;
        o.loss = trial == 3 ? std::nan("") : s.get_real("x");
        return o;
      },
      space, 5, 2);
  EXPECT_EQ(r.history[2].loss, 1.0);
  EXPECT_EQ(r.history[2].note, "isolated node 4 has zero total affinity");
  EXPECT_EQ(r.history[3].loss, 1.0);
  EXPECT_EQ(r.history.size(), 5u);
  EXPECT_THROW(optimize([](const HyperparamSample&, std::size_t) { return TrialOutcome{}; }, space, 0, 1),
               ValidationError);
}

TEST(Optimize, AllStartupIsLossIndependentRandomSearch) {
  ParamSpace space;
  space.add(Dimension::real("x", 0, 1));
  space.add(Dimension::categorical("c", {"a", "b", "c"}));
  TpeOptions random_search;
  random_search.n_startup = 50;
  const auto a = optimize([](const HyperparamSample& s, std::size_t) { return TrialOutcome{s.get_real("x"), {}, {}, ""}; },
                          space, 50, 4, random_search);
  const auto b = optimize([](const HyperparamSample& s, std::size_t) { return TrialOutcome{1 - s.get_real("x"), {}, {}, ""}; },
                          space, 50, 4, random_search);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(a.history[i].sample, b.history[i].sample);
  // with the model active the proposals do react to the losses
  const auto c = optimize([](const HyperparamSample& s, std::size_t) { return TrialOutcome{s.get_real("x"), {}, {}, ""}; },
                          space, 50, 4);
  const auto d = optimize([](const HyperparamSample& s, std::size_t) { return TrialOutcome{1 - s.get_real("x"), {}, {}, ""}; },
                          space, 50, 4);
  EXPECT_NE(c.history.back().sample, d.history.back().sample);
}

TEST(HistoryCsv, Layout) {
  const ParamSpace space = kernel_space();
  TrialRecord r0 = record(0, {}, 0.25);
  r0.sample.set("kernel", std::string("knn"));
  r0.sample.set("n_neighbors", std::int64_t{9});
  r0.metrics.recall = 80.0;
  r0.smote_applied = true;
  r0.note = "a, b";
  const std::vector<TrialRecord> h{r0};
  const std::string csv = history_to_csv(space, h, false);
  EXPECT_EQ(csv,
            "trial,kernel,gamma,n_neighbors,loss,recall,pf,g_measure,precision,f1,auc,smote_applied,note\n"
            "0,knn,,9,0.25,80,NA,NA,NA,NA,NA,true,\"a, b\"\n");
  EXPECT_NE(history_to_csv(space, h, true).find(",wall_time_s,"), std::string::npos);
}

}  // namespace
}  // namespace dapper
