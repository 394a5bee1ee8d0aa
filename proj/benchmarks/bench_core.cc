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

#include <benchmark/benchmark.h>

#include "dapper/dataset.hpp"
#include "dapper/forest.hpp"
#include "dapper/graph_ssl.hpp"
#include "dapper/metrics.hpp"
#include "dapper/optimizer.hpp"
#include "dapper/pipeline.hpp"
#include "dapper/smote.hpp"

namespace dapper {
namespace {

// Training-sized set with 10% of the labels kept.
Dataset masked(std::size_t n) {
  const Dataset ds = synth_generate(n, 12, 0.0484, 2.5, 1);
  return mask_labels(ds, LabelRate{0.1, 2});
}

void BM_NeighborIndex(benchmark::State& state) {
  const Dataset ds = masked(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(NeighborIndex(ds.features));
}
BENCHMARK(BM_NeighborIndex)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_RbfAffinity(benchmark::State& state) {
  const Dataset ds = masked(static_cast<std::size_t>(state.range(0)));
  const NeighborIndex index(ds.features);
  for (auto _ : state) benchmark::DoNotOptimize(rbf_affinity(index, 20.0));
}
BENCHMARK(BM_RbfAffinity)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_LabelPropagation(benchmark::State& state) {
  const Dataset ds = masked(static_cast<std::size_t>(state.range(0)));
  const NeighborIndex index(ds.features);
  SslParams p = default_propagation_params();
  p.kernel = {Kernel::kKnn, 20.0, 7};
  for (auto _ : state) benchmark::DoNotOptimize(label_propagation(ds, p, index));
}
BENCHMARK(BM_LabelPropagation)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_LabelSpreading(benchmark::State& state) {
  const Dataset ds = masked(static_cast<std::size_t>(state.range(0)));
  const NeighborIndex index(ds.features);
  const SslParams p = default_spreading_params();
  for (auto _ : state) benchmark::DoNotOptimize(label_spreading(ds, p, index));
}
BENCHMARK(BM_LabelSpreading)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Smote(benchmark::State& state) {
  const Dataset ds = synth_generate(static_cast<std::size_t>(state.range(0)), 12, 0.0484, 2.5, 2);
  SmoteParams p;
  p.m = 500;
  for (auto _ : state) benchmark::DoNotOptimize(smote(ds, p));
}
BENCHMARK(BM_Smote)->Arg(1000)->Arg(3200)->Unit(benchmark::kMillisecond);

void BM_FitForest(benchmark::State& state) {
  const Dataset ds = synth_generate(static_cast<std::size_t>(state.range(0)), 12, 0.2, 2.5, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fit_forest(ds, default_forest_params(1), 1));
}
BENCHMARK(BM_FitForest)->Arg(1000)->Arg(3200)->Unit(benchmark::kMillisecond);

void BM_AucRoc(benchmark::State& state) {
  const Dataset ds = synth_generate(static_cast<std::size_t>(state.range(0)), 2, 0.3, 1.0, 4);
  std::vector<double> scores;
  for (std::size_t i = 0; i < ds.size(); ++i) scores.push_back(ds.features(i, 0));
  for (auto _ : state) benchmark::DoNotOptimize(auc_roc(ds.labels, scores));
}
BENCHMARK(BM_AucRoc)->Arg(10000);

void BM_TpeSample(benchmark::State& state) {
  const ParamSpace space = dapper_space(Learner::kSpreading);
  Rng rng(5);
  std::vector<TrialRecord> history;
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) {
    TrialRecord r;
    r.index = i;
    r.sample = sample(space, {}, rng);
    r.loss = uniform01(rng);
    history.push_back(r);
  }
  for (auto _ : state) benchmark::DoNotOptimize(sample(space, history, rng));
}
BENCHMARK(BM_TpeSample)->Arg(30)->Arg(99);

}  // namespace
}  // namespace dapper

BENCHMARK_MAIN();
