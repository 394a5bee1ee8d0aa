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

#include "dapper/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dapper/error.hpp"
#include "dapper/io.hpp"

namespace dapper {
namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLogSqrt2Pi = 0.91893853320467274;

bool is_numeric(const Dimension& d) { return d.kind != DimensionKind::kCategorical; }

// Continuous support of a numeric dimension; integers widen by half a step so
// every value owns an equal share after rounding.
std::pair<double, double> support(const Dimension& d) {
  if (d.kind == DimensionKind::kInteger) return {d.low - 0.5, d.high + 0.5};
  return {d.low, d.high};
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

std::size_t choice_index(const Dimension& d, const std::string& value) {
  const auto it = std::find(d.choices.begin(), d.choices.end(), value);
  if (it == d.choices.end()) {
    throw ValidationError("'" + value + "' is not a choice of '" + d.name + "'");
  }
  return static_cast<std::size_t>(it - d.choices.begin());
}

double numeric_value(const Dimension& d, const ParamValue& v) {
  if (d.kind == DimensionKind::kInteger) return static_cast<double>(std::get<std::int64_t>(v));
  return std::get<double>(v);
}

// Density estimate for one dimension over one group of trials.
class Parzen {
 public:
  Parzen(const Dimension& dim, std::vector<double> obs, double prior_weight)
      : dim_(dim), obs_(std::move(obs)), prior_weight_(prior_weight) {
    if (!is_numeric(dim_)) {
      counts_.assign(dim_.choices.size(), 0.0);
      for (double o : obs_) counts_[static_cast<std::size_t>(o)] += 1.0;
      return;
    }
    const auto [lo, hi] = support(dim_);
    const double range = hi - lo;
    bandwidth_ = range / 10.0;
    if (obs_.size() >= 2) {
      std::vector<double> sorted = obs_;
      std::sort(sorted.begin(), sorted.end());
      const double n = static_cast<double>(sorted.size());
      const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
      double var = 0.0;
      for (double o : sorted) var += (o - mean) * (o - mean);
      const double sd = std::sqrt(var / (n - 1.0));
      const auto quantile = [&](double q) {
        const double pos = q * (n - 1.0);
        const auto i = static_cast<std::size_t>(std::floor(pos));
        const std::size_t j = std::min(i + 1, sorted.size() - 1);
        return sorted[i] + (pos - static_cast<double>(i)) * (sorted[j] - sorted[i]);
      };
      const double iqr = quantile(0.75) - quantile(0.25);
      double spread = sd;
      if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
      bandwidth_ = std::max(bandwidth_, 0.9 * spread * std::pow(n, -0.2));
    }
    for (double o : obs_) {
      mass_.push_back(normal_cdf((hi - o) / bandwidth_) - normal_cdf((lo - o) / bandwidth_));
    }
  }

  double log_density(double x) const {
    if (!is_numeric(dim_)) {
      const double k = static_cast<double>(dim_.choices.size());
      const double total = static_cast<double>(obs_.size());
      return std::log((counts_[static_cast<std::size_t>(x)] + 1.0) / (total + k));
    }
    const auto [lo, hi] = support(dim_);
    double density = prior_weight_ / (hi - lo);
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      const double z = (x - obs_[i]) / bandwidth_;
      density += std::exp(-0.5 * z * z - kLogSqrt2Pi) / (bandwidth_ * mass_[i]);
    }
    return std::log(density / (static_cast<double>(obs_.size()) + prior_weight_));
  }

  // Internal value: category index, or a continuous value within support.
  double draw(Rng& rng) const {
    if (!is_numeric(dim_)) {
      const double k = static_cast<double>(dim_.choices.size());
      const double total = static_cast<double>(obs_.size()) + k;
      double u = uniform01(rng) * total;
      for (std::size_t c = 0; c < counts_.size(); ++c) {
        u -= counts_[c] + 1.0;
        if (u < 0.0) return static_cast<double>(c);
      }
      return static_cast<double>(counts_.size() - 1);
    }
    const auto [lo, hi] = support(dim_);
    const double pick = uniform01(rng) * (static_cast<double>(obs_.size()) + prior_weight_);
    if (pick >= static_cast<double>(obs_.size())) return lo + uniform01(rng) * (hi - lo);
    const double mu = obs_[static_cast<std::size_t>(pick)];
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double x = mu + bandwidth_ * standard_normal(rng);
      if (x >= lo && x <= hi) return x;
    }
    return std::clamp(mu, lo, hi);
  }

 private:
  const Dimension& dim_;
  std::vector<double> obs_;
  double prior_weight_;
  double bandwidth_ = 1.0;
  std::vector<double> mass_;
  std::vector<double> counts_;
};

ParamValue to_param(const Dimension& d, double internal) {
  switch (d.kind) {
    case DimensionKind::kCategorical:
      return d.choices[static_cast<std::size_t>(internal)];
    case DimensionKind::kInteger: {
      const auto v = static_cast<std::int64_t>(std::llround(internal));
      return std::clamp(v, static_cast<std::int64_t>(d.low), static_cast<std::int64_t>(d.high));
    }
    case DimensionKind::kReal:
      return std::clamp(internal, d.low, d.high);
  }
  return internal;
}

double to_internal(const Dimension& d, const ParamValue& v) {
  if (d.kind == DimensionKind::kCategorical) return static_cast<double>(choice_index(d, std::get<std::string>(v)));
  return numeric_value(d, v);
}

ParamValue draw_uniform(const Dimension& d, Rng& rng) {
  switch (d.kind) {
    case DimensionKind::kCategorical:
      return d.choices[uniform_index(rng, d.choices.size())];
    case DimensionKind::kInteger: {
      const auto lo = static_cast<std::int64_t>(d.low);
      const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(d.high) - lo + 1);
      return lo + static_cast<std::int64_t>(uniform_index(rng, span));
    }
    case DimensionKind::kReal:
      return d.low + uniform01(rng) * (d.high - d.low);
  }
  return 0.0;
}

HyperparamSample uniform_sample(const ParamSpace& space, Rng& rng) {
  HyperparamSample s;
  for (const auto& d : space.dims()) {
    if (space.is_active(d, s)) s.set(d.name, draw_uniform(d, rng));
  }
  return s;
}

bool within_bounds(const Dimension& d, const ParamValue& v) {
  switch (d.kind) {
    case DimensionKind::kCategorical:
      return std::holds_alternative<std::string>(v) &&
             std::find(d.choices.begin(), d.choices.end(), std::get<std::string>(v)) !=
                 d.choices.end();
    case DimensionKind::kInteger:
      return std::holds_alternative<std::int64_t>(v) &&
             static_cast<double>(std::get<std::int64_t>(v)) >= d.low &&
             static_cast<double>(std::get<std::int64_t>(v)) <= d.high;
    case DimensionKind::kReal:
      return std::holds_alternative<double>(v) && std::get<double>(v) >= d.low &&
             std::get<double>(v) <= d.high;
  }
  return false;
}

}  // namespace

Dimension Dimension::categorical(std::string name, std::vector<std::string> choices,
                                 std::optional<Condition> condition) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimensionKind::kCategorical;
  d.choices = std::move(choices);
  d.condition = std::move(condition);
  return d;
}

Dimension Dimension::real(std::string name, double low, double high,
                          std::optional<Condition> condition) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimensionKind::kReal;
  d.low = low;
  d.high = high;
  d.condition = std::move(condition);
  return d;
}

Dimension Dimension::integer(std::string name, std::int64_t low, std::int64_t high,
                             std::optional<Condition> condition) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimensionKind::kInteger;
  d.low = static_cast<double>(low);
  d.high = static_cast<double>(high);
  d.condition = std::move(condition);
  return d;
}

const ParamValue& HyperparamSample::at(const std::string& name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) throw ValidationError("sample has no value for '" + name + "'");
  return it->second;
}

std::int64_t HyperparamSample::get_int(const std::string& name) const {
  const auto& v = at(name);
  if (!std::holds_alternative<std::int64_t>(v)) throw ValidationError("'" + name + "' is not an integer");
  return std::get<std::int64_t>(v);
}

double HyperparamSample::get_real(const std::string& name) const {
  const auto& v = at(name);
  if (std::holds_alternative<std::int64_t>(v)) return static_cast<double>(std::get<std::int64_t>(v));
  if (!std::holds_alternative<double>(v)) throw ValidationError("'" + name + "' is not numeric");
  return std::get<double>(v);
}

const std::string& HyperparamSample::get_string(const std::string& name) const {
  const auto& v = at(name);
  if (!std::holds_alternative<std::string>(v)) throw ValidationError("'" + name + "' is not categorical");
  return std::get<std::string>(v);
}

std::string to_string(const ParamValue& value) {
  if (std::holds_alternative<std::int64_t>(value)) return std::to_string(std::get<std::int64_t>(value));
  if (std::holds_alternative<double>(value)) return format_double(std::get<double>(value));
  return std::get<std::string>(value);
}

ParamSpace::ParamSpace(std::vector<Dimension> dims) {
  for (auto& d : dims) add(std::move(d));
}

ParamSpace& ParamSpace::add(Dimension dim) {
  if (dim.name.empty()) throw ValidationError("dimension name must not be empty");
  if (find(dim.name)) throw ValidationError("duplicate dimension '" + dim.name + "'");
  if (dim.kind == DimensionKind::kCategorical && dim.choices.empty()) {
    throw ValidationError("categorical '" + dim.name + "' has no choices");
  }
  if (is_numeric(dim) && !(dim.low <= dim.high)) {
    throw ValidationError("dimension '" + dim.name + "' has low > high");
  }
  if (dim.condition) {
    const Dimension* parent = find(dim.condition->parent);
    if (!parent || parent->kind != DimensionKind::kCategorical) {
      throw ValidationError("dimension '" + dim.name + "' is conditioned on '" +
                            dim.condition->parent + "', which is not an earlier categorical");
    }
    for (const auto& v : dim.condition->values) choice_index(*parent, v);
  }
  dims_.push_back(std::move(dim));
  return *this;
}

const Dimension* ParamSpace::find(const std::string& name) const {
  for (const auto& d : dims_) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

bool ParamSpace::is_active(const Dimension& dim, const HyperparamSample& partial) const {
  if (!dim.condition) return true;
  if (!partial.has(dim.condition->parent)) return false;
  const auto& v = partial.at(dim.condition->parent);
  if (!std::holds_alternative<std::string>(v)) return false;
  const auto& values = dim.condition->values;
  return std::find(values.begin(), values.end(), std::get<std::string>(v)) != values.end();
}

void ParamSpace::check(const HyperparamSample& sample) const {
  for (const auto& d : dims_) {
    const bool active = is_active(d, sample);
    if (active && !sample.has(d.name)) throw ValidationError("active dimension '" + d.name + "' missing");
    if (!active && sample.has(d.name)) throw ValidationError("inactive dimension '" + d.name + "' present");
    if (active && !within_bounds(d, sample.at(d.name))) {
      throw ValidationError("'" + d.name + "' = " + to_string(sample.at(d.name)) + " is out of bounds");
    }
  }
  for (const auto& [name, value] : sample.values()) {
    if (!find(name)) throw ValidationError("sample has unknown dimension '" + name + "'");
  }
}

HyperparamSample sample(const ParamSpace& space, std::span<const TrialRecord> history, Rng& rng,
                        const TpeOptions& options) {
  if (space.empty()) throw ValidationError("cannot sample from an empty space");
  if (history.size() < std::max<std::size_t>(options.n_startup, 1)) return uniform_sample(space, rng);

  std::vector<std::size_t> order(history.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return history[a].loss < history[b].loss;
  });
  const auto n_good = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(options.gamma * static_cast<double>(history.size()))), 1,
      history.size());

  std::vector<Parzen> good, bad;
  good.reserve(space.dims().size());
  bad.reserve(space.dims().size());
  for (const auto& d : space.dims()) {
    std::vector<double> g, b;
    for (std::size_t r = 0; r < order.size(); ++r) {
      const auto& s = history[order[r]].sample;
      if (!s.has(d.name)) continue;
      (r < n_good ? g : b).push_back(to_internal(d, s.at(d.name)));
    }
    good.emplace_back(d, std::move(g), options.prior_weight);
    bad.emplace_back(d, std::move(b), options.prior_weight);
  }

  HyperparamSample best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < std::max<std::size_t>(options.n_candidates, 1); ++c) {
    HyperparamSample candidate;
    double score = 0.0;
    for (std::size_t k = 0; k < space.dims().size(); ++k) {
      const Dimension& d = space.dims()[k];
      if (!space.is_active(d, candidate)) continue;
      const ParamValue v = to_param(d, good[k].draw(rng));
      const double x = to_internal(d, v);
      score += good[k].log_density(x) - bad[k].log_density(x);
      candidate.set(d.name, v);
    }
    if (score > best_score) {
      best_score = score;
      best = std::move(candidate);
    }
  }
  return best;
}

OptimizeResult optimize(const Objective& objective, const ParamSpace& space, std::size_t n_trials,
                        std::uint64_t seed, const TpeOptions& options,
                        const ProgressCallback& progress) {
  if (n_trials < 1) throw ValidationError("n_trials must be at least 1");
  Rng rng = make_rng(seed, "tpe");
  OptimizeResult result;
  result.history.reserve(n_trials);
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < n_trials; ++i) {
    TrialRecord rec;
    rec.index = i;
    rec.sample = sample(space, result.history, rng, options);
    const auto start = std::chrono::steady_clock::now();
    try {
      TrialOutcome out = objective(rec.sample, i);
      rec.loss = std::isfinite(out.loss) ? std::clamp(out.loss, 0.0, 1.0) : 1.0;
      rec.metrics = out.metrics;
      rec.smote_applied = out.smote_applied;
      rec.note = std::move(out.note);
    } catch (const std::exception& e) {
      rec.loss = 1.0;
      rec.note = e.what();
    }
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(std::move(rec));
    if (result.history[i].loss < result.history[best_index].loss) best_index = i;
    if (progress) progress(result.history[i], result.history[best_index]);
  }
  result.best = result.history[best_index];
  return result;
}

std::string history_to_csv(const ParamSpace& space, std::span<const TrialRecord> history,
                           bool include_wall_time) {
  std::ostringstream out;
  out << "trial";
  for (const auto& d : space.dims()) out << ',' << csv_field(d.name);
  out << ",loss";
  for (const auto& m : metric_names()) out << ',' << m;
  out << ",smote_applied";
  if (include_wall_time) out << ",wall_time_s";
  out << ",note\n";
  for (const auto& rec : history) {
    out << rec.index;
    for (const auto& d : space.dims()) {
      out << ',';
      if (rec.sample.has(d.name)) out << csv_field(to_string(rec.sample.at(d.name)));
    }
    out << ',' << format_double(rec.loss);
    for (const auto& v : metric_values(rec.metrics)) out << ',' << (v ? format_double(*v) : "NA");
    out << ',' << (rec.smote_applied ? (*rec.smote_applied ? "true" : "false") : "");
    if (include_wall_time) out << ',' << format_fixed(rec.wall_time_s, 6);
    out << ',' << csv_field(rec.note) << '\n';
  }
  return out.str();
}

}  // namespace dapper
