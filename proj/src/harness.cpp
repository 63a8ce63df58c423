// Copyright 2026 The annoroute Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "annoroute/harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "annoroute/bounds.hpp"
#include "annoroute/estimation.hpp"
#include "annoroute/routing.hpp"

namespace annoroute {
namespace {

constexpr std::size_t kPluginSamples = 1000000;

// Runs fn(i) for i in [0, n). Results must be written by index so the outcome
// does not depend on the number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

double draw_gamma(double shape, Rng& rng) {
  std::gamma_distribution<double> gamma(shape, 1.0);
  return gamma(rng);
}

// Keeps the cheapest source and ground truth.
std::vector<AnnotationRecord> project_to_cheapest(
    std::span<const AnnotationRecord> records) {
  std::vector<AnnotationRecord> projected;
  projected.reserve(records.size());
  for (const auto& record : records) {
    AnnotationRecord r = record;
    r.losses = {record.losses.front(), record.losses.back()};
    r.costs = {record.costs.front(), record.costs.back()};
    projected.push_back(std::move(r));
  }
  return projected;
}

void check_same_size(const std::vector<double>& v, std::size_t k,
                     const char* what) {
  if (v.size() != k) {
    throw Error("scenario", std::string("cost model field '") + what +
                                "' must have one entry per source");
  }
}

}  // namespace

double LossModel::probability(double score) const {
  return std::clamp(floor + scale * std::pow(score, power), 0.0, 1.0);
}

double LossModel::integral(double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  if (floor >= 1.0) return hi - lo;
  if (scale == 0.0) return floor * (hi - lo);
  // floor + scale * s^power reaches 1 at `saturate`.
  const double saturate = std::pow((1.0 - floor) / scale, 1.0 / power);
  auto antiderivative = [&](double s) {
    return floor * s + scale * std::pow(s, power + 1.0) / (power + 1.0);
  };
  double total = 0.0;
  const double rising_hi = std::min(hi, saturate);
  if (rising_hi > lo) total += antiderivative(rising_hi) - antiderivative(lo);
  const double flat_lo = std::max(lo, saturate);
  if (hi > flat_lo) total += hi - flat_lo;
  return total;
}

std::size_t CostModel::num_sources() const {
  return kind == Kind::kApi ? price_in.size() : base.size();
}

std::vector<double> CostModel::costs_at(double score) const {
  const std::size_t k = num_sources();
  std::vector<double> costs(k);
  for (std::size_t i = 0; i < k; ++i) {
    switch (kind) {
      case Kind::kConstant:
        costs[i] = base[i];
        break;
      case Kind::kLinear:
        costs[i] = base[i] + slope[i] * score;
        break;
      case Kind::kApi:
        costs[i] =
            api_cost(price_in[i], tokens_in[i], price_out[i],
                     tokens_out_base[i] + tokens_out_slope[i] * score);
        break;
    }
  }
  return costs;
}

CostModel CostModel::tokens(std::vector<double> tokens_out_base,
                            std::vector<double> tokens_out_slope) {
  CostModel model;
  model.kind = Kind::kApi;
  const std::size_t k = tokens_out_base.size() + 1;
  model.price_in.assign(k, 0.0);
  model.tokens_in.assign(k, 0.0);
  model.price_out.assign(k, 1.0);
  model.tokens_out_base = std::move(tokens_out_base);
  model.tokens_out_base.push_back(kExpertTokenBudget);
  model.tokens_out_slope = std::move(tokens_out_slope);
  model.tokens_out_slope.push_back(0.0);
  return model;
}

double api_cost(double price_in, double tokens_in, double price_out,
                double tokens_out) {
  return price_in * tokens_in + price_out * tokens_out;
}

void SyntheticScenario::validate() const {
  if (num_sources < 2) throw Error("scenario", "need at least 2 sources");
  if (losses.size() + 1 != num_sources) {
    throw Error("scenario", "need one loss model per non-expert source");
  }
  if (score.kind == ScoreDistribution::Kind::kBeta &&
      !(score.a > 0.0 && score.b > 0.0)) {
    throw Error("scenario", "beta parameters must be positive");
  }
  for (const auto& model : losses) {
    if (!(model.floor >= 0.0 && model.scale >= 0.0 && model.power > 0.0)) {
      throw Error("scenario",
                  "loss models need floor >= 0, scale >= 0 and power > 0");
    }
  }
  // Error probabilities must not increase along the ladder.
  for (int i = 0; i <= 1000; ++i) {
    const double s = i / 1000.0;
    for (std::size_t k = 1; k < losses.size(); ++k) {
      if (losses[k].probability(s) > losses[k - 1].probability(s)) {
        throw Error("scenario", "source " + std::to_string(k) +
                                    " is more error-prone than source " +
                                    std::to_string(k - 1));
      }
    }
  }
  if (cost.num_sources() != num_sources) {
    throw Error("scenario", "cost model must cover every source");
  }
  switch (cost.kind) {
    case CostModel::Kind::kConstant:
      break;
    case CostModel::Kind::kLinear:
      check_same_size(cost.slope, num_sources, "slope");
      break;
    case CostModel::Kind::kApi:
      check_same_size(cost.price_out, num_sources, "price_out");
      check_same_size(cost.tokens_in, num_sources, "tokens_in");
      check_same_size(cost.tokens_out_base, num_sources, "tokens_out_base");
      check_same_size(cost.tokens_out_slope, num_sources, "tokens_out_slope");
      break;
  }
  for (double s : {0.0, 1.0}) {
    const auto c = cost.costs_at(s);
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (!(c[k] > 0.0)) throw Error("scenario", "costs must be positive");
      if (k > 0 && c[k] < c[k - 1]) {
        throw Error("scenario", "costs must be non-decreasing along the ladder");
      }
    }
  }
  if (n_cal < 2) throw Error("scenario", "calibration size must be >= 2");
  if (n_test < 1) throw Error("scenario", "test size must be >= 1");
}

SyntheticScenario SyntheticScenario::default_for(std::size_t num_sources) {
  if (num_sources < 2) throw Error("scenario", "need at least 2 sources");
  SyntheticScenario scenario;
  scenario.num_sources = num_sources;
  const std::size_t models = num_sources - 1;
  for (std::size_t k = 0; k < models; ++k) {
    // Geometric decay of the error scale from 0.5 down to 0.12.
    const double frac = models == 1 ? 0.0 : static_cast<double>(k) /
                                                 static_cast<double>(models - 1);
    scenario.losses.push_back({0.0, 0.5 * std::pow(0.24, frac), 2.0});
  }
  scenario.cost.kind = CostModel::Kind::kConstant;
  for (std::size_t k = 0; k < models; ++k) {
    scenario.cost.base.push_back(static_cast<double>(k + 1));
  }
  scenario.cost.base.push_back(8.0);
  return scenario;
}

SyntheticGenerator::SyntheticGenerator(SyntheticScenario scenario)
    : scenario_(std::move(scenario)) {
  scenario_.validate();
  if (scenario_.score.kind == ScoreDistribution::Kind::kUniform) return;
  Rng rng(derive_seed(scenario_.seed, 0, 0x5eed));
  plugin_scores_.resize(kPluginSamples);
  for (auto& s : plugin_scores_) s = draw_score(rng);
  std::sort(plugin_scores_.begin(), plugin_scores_.end());
  plugin_prefix_.assign(scenario_.losses.size(),
                        std::vector<double>(kPluginSamples + 1, 0.0));
  for (std::size_t k = 0; k < scenario_.losses.size(); ++k) {
    auto& prefix = plugin_prefix_[k];
    for (std::size_t i = 0; i < kPluginSamples; ++i) {
      prefix[i + 1] =
          prefix[i] + scenario_.losses[k].probability(plugin_scores_[i]);
    }
  }
}

double SyntheticGenerator::draw_score(Rng& rng) const {
  if (scenario_.score.kind == ScoreDistribution::Kind::kUniform) {
    return uniform01(rng);
  }
  const double x = draw_gamma(scenario_.score.a, rng);
  const double y = draw_gamma(scenario_.score.b, rng);
  return x + y > 0.0 ? x / (x + y) : 0.5;
}

std::vector<AnnotationRecord> SyntheticGenerator::draw(
    std::size_t n, Rng& rng, const std::string& id_prefix) const {
  const std::size_t k = scenario_.num_sources;
  std::vector<AnnotationRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    AnnotationRecord record;
    record.id = id_prefix + std::to_string(i);
    record.score = draw_score(rng);
    // One shared uniform per record couples the sources, so a record that a
    // better source gets wrong is also wrong for every cheaper source.
    const double v = uniform01(rng);
    record.losses.resize(k, 0.0);
    for (std::size_t s = 0; s + 1 < k; ++s) {
      record.losses[s] =
          v < scenario_.losses[s].probability(record.score) ? 1.0 : 0.0;
    }
    record.costs = scenario_.cost.costs_at(record.score);
    records.push_back(std::move(record));
  }
  return records;
}

double SyntheticGenerator::true_risk(const ThresholdVector& thresholds) const {
  if (thresholds.num_sources() != scenario_.num_sources) {
    throw Error("dimension_mismatch",
                "threshold vector does not match the scenario's sources");
  }
  const auto u = thresholds.values();
  double risk = 0.0;
  double lo = 0.0;
  if (closed_form()) {
    for (std::size_t k = 0; k < u.size(); ++k) {
      risk += scenario_.losses[k].integral(lo, u[k]);
      lo = u[k];
    }
    return risk;
  }
  std::size_t lo_idx = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto hi_idx = static_cast<std::size_t>(
        std::upper_bound(plugin_scores_.begin(), plugin_scores_.end(), u[k]) -
        plugin_scores_.begin());
    if (hi_idx > lo_idx) {
      risk += plugin_prefix_[k][hi_idx] - plugin_prefix_[k][lo_idx];
    }
    lo_idx = std::max(lo_idx, hi_idx);
  }
  return risk / static_cast<double>(kPluginSamples);
}

GeneratedData generate(const SyntheticScenario& scenario) {
  auto truth = std::make_shared<const SyntheticGenerator>(scenario);
  Rng rng(derive_seed(scenario.seed, 0, 1));
  GeneratedData data;
  data.calibration = truth->draw(scenario.n_cal, rng, "cal-");
  data.test = truth->draw(scenario.n_test, rng, "test-");
  data.truth = std::move(truth);
  return data;
}

CoverageReport pac_coverage_experiment(const SyntheticScenario& scenario,
                                       const CalibrationConfig& config,
                                       std::size_t trials, Method method) {
  if (trials < 100) throw Error("trials", "coverage needs at least 100 trials");
  config.validate();
  const SyntheticGenerator generator(scenario);
  const std::size_t k = scenario.num_sources;
  if (method == Method::kCoannotating && k != 3) {
    throw Error("method_combination", "coannotating needs exactly 3 sources");
  }
  const SourceLadder ladder = generator.ladder();
  const SourceLadder pair = SourceLadder::with_size(2);

  CoverageReport report;
  report.method = method;
  report.config = config;
  report.scenario = scenario;
  report.trials = trials;
  report.per_trial.resize(trials);

  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(scenario.seed, t, 1));
    const auto cal = generator.draw(scenario.n_cal, rng, "cal-");
    const auto test = generator.draw(scenario.n_test, rng, "test-");
    CalibrationConfig cfg = config;
    cfg.seed = derive_seed(config.seed, t, 2);
    cfg.keep_surface = false;

    CalibrationOutcome outcome;
    std::vector<double> full;
    if (method == Method::kPacLabeling) {
      outcome = pac_labeling_calibrate(project_to_cheapest(cal), pair, cfg);
      // (u, ..., u) routes exactly like the two-source rule with threshold u.
      full.assign(k - 1, outcome.thresholds[0]);
    } else {
      outcome = run_method(method, cal, ladder, cfg);
      full.assign(outcome.thresholds.values().begin(),
                  outcome.thresholds.values().end());
    }
    const ThresholdVector thresholds(full);
    TrialRecord& record = report.per_trial[t];
    record.trial = t;
    record.thresholds = full;
    record.true_risk = generator.true_risk(thresholds);
    record.violation = record.true_risk > config.epsilon;
    record.test_error = empirical_risk(thresholds, test);
    record.cost_savings = cost_savings(thresholds, test);
    record.fallback = outcome.fallback_used;
  });

  double savings = 0.0;
  double error = 0.0;
  double risk = 0.0;
  for (const auto& record : report.per_trial) {
    report.violations += record.violation ? 1 : 0;
    savings += record.cost_savings;
    error += record.test_error;
    risk += record.true_risk;
  }
  const double n = static_cast<double>(trials);
  report.violation_rate = static_cast<double>(report.violations) / n;
  report.mean_cost_savings = savings / n;
  report.mean_error = error / n;
  report.mean_true_risk = risk / n;
  return report;
}

BoundCheckReport empirical_bound_check(const SyntheticScenario& scenario,
                                       const CalibrationConfig& config,
                                       std::size_t trials, double slack,
                                       std::size_t test_size,
                                       double mc_tolerance) {
  if (!(slack > 0.0)) throw Error("config", "slack t must be positive");
  if (trials == 0 || test_size == 0) {
    throw Error("trials", "need at least one trial and one test record");
  }
  config.validate();
  const SyntheticGenerator generator(scenario);
  const SourceLadder ladder = generator.ladder();
  std::vector<char> ok(trials, 0);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(scenario.seed, t, 3));
    const auto cal = generator.draw(scenario.n_cal, rng, "cal-");
    const auto test = generator.draw(test_size, rng, "test-");
    CalibrationConfig cfg = config;
    cfg.seed = derive_seed(config.seed, t, 4);
    const auto outcome = calibrate(cal, ladder, cfg);
    ok[t] = empirical_risk(outcome.thresholds, test) <= config.epsilon + slack;
  });
  BoundCheckReport report;
  report.trials = trials;
  report.test_size = test_size;
  report.slack = slack;
  report.successes =
      static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
  report.fraction =
      static_cast<double>(report.successes) / static_cast<double>(trials);
  const double b = config.loss_bound;
  report.theorem_bound =
      1.0 - config.alpha -
      (1.0 - config.alpha) *
          std::exp(-2.0 * static_cast<double>(test_size) * slack * slack /
                   (b * b));
  report.passed = report.fraction >= report.theorem_bound - mc_tolerance;
  return report;
}

std::optional<std::size_t> brute_force_optimal(const Surface& surface,
                                               double epsilon) {
  bool any = false;
  double min_cost = 0.0;
  for (const auto& row : surface.rows) {
    if (row.ucb > epsilon) continue;
    if (!any || row.cost < min_cost) min_cost = row.cost;
    any = true;
  }
  if (!any) return std::nullopt;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < surface.rows.size(); ++i) {
    const auto& row = surface.rows[i];
    if (row.ucb > epsilon || row.cost != min_cost) continue;
    if (!best) {
      best = i;
      continue;
    }
    // Compare from the last threshold backwards.
    const auto& incumbent = surface.rows[*best].thresholds;
    for (std::size_t d = row.thresholds.size(); d-- > 0;) {
      if (row.thresholds[d] != incumbent[d]) {
        if (row.thresholds[d] > incumbent[d]) best = i;
        break;
      }
    }
  }
  return best;
}

MonotonicityResult monotonicity_check(std::span<const AnnotationRecord> records,
                                      std::span<const double> grid,
                                      std::size_t num_sources,
                                      MonotonicityMode mode) {
  const std::size_t dims = num_sources - 1;
  const auto cells =
      enumerate_cells(grid, num_sources, std::numeric_limits<std::size_t>::max());
  std::map<std::vector<double>, std::size_t> index;
  std::vector<double> value(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    index.emplace(std::vector<double>(cell.values().begin(), cell.values().end()),
                  i);
    value[i] = mode == MonotonicityMode::kCost ? empirical_cost(cell, records)
                                               : empirical_risk(cell, records);
  }
  auto describe = [](const ThresholdVector& a, const ThresholdVector& b,
                     double va, double vb) {
    std::ostringstream out;
    out.precision(17);
    out << "(";
    for (std::size_t d = 0; d < a.size(); ++d) out << (d ? "," : "") << a[d];
    out << ") -> " << va << " vs (";
    for (std::size_t d = 0; d < b.size(); ++d) out << (d ? "," : "") << b[d];
    out << ") -> " << vb;
    return out.str();
  };

  MonotonicityResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    for (std::size_t d = 0; d < dims; ++d) {
      if (mode == MonotonicityMode::kRiskTop && d + 1 != dims) continue;
      const auto pos = std::upper_bound(grid.begin(), grid.end(), cell[d]);
      if (pos == grid.end()) continue;
      std::vector<double> next(cell.values().begin(), cell.values().end());
      next[d] = *pos;
      if (d + 1 < dims && next[d] > next[d + 1]) continue;
      const std::size_t j = index.at(next);
      ++result.pairs_checked;
      const bool ok = mode == MonotonicityMode::kCost ? value[j] <= value[i]
                                                      : value[j] >= value[i];
      if (!ok && result.passed) {
        result.passed = false;
        result.counterexample = describe(cell, cells[j], value[i], value[j]);
      }
    }
  }
  return result;
}

std::vector<ComparisonRow> method_comparison(const SyntheticScenario& scenario,
                                             const CalibrationConfig& config,
                                             std::size_t trials,
                                             std::span<const Method> methods) {
  std::vector<ComparisonRow> rows;
  for (Method method : methods) {
    const auto report = pac_coverage_experiment(scenario, config, trials, method);
    rows.push_back({method, trials, report.mean_error, report.violation_rate,
                    report.mean_cost_savings});
  }
  return rows;
}

double fixed_threshold_coverage(const SyntheticScenario& scenario,
                                const CalibrationConfig& config,
                                const ThresholdVector& thresholds,
                                std::size_t sample_size, std::size_t trials) {
  config.validate();
  if (trials == 0) throw Error("trials", "need at least one trial");
  const SyntheticGenerator generator(scenario);
  const double truth = generator.true_risk(thresholds);
  std::vector<char> covered(trials, 0);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(scenario.seed, t, 5));
    auto records = generator.draw(sample_size, rng, "cal-");
    const auto set = apply_query_mask(std::move(records), config.query_prob,
                                      derive_seed(config.seed, t, 6));
    const auto w = weighted_losses(set, thresholds);
    const UcbInput input{w, config.alpha, config.loss_bound,
                         set.min_query_prob()};
    covered[t] = truth <= compute_ucb(config.ucb, input, config.betting);
  });
  return static_cast<double>(std::count(covered.begin(), covered.end(), 1)) /
         static_cast<double>(trials);
}

double exhaustive_is_expectation(std::span<const AnnotationRecord> records,
                                 const ThresholdVector& thresholds) {
  const std::size_t m = records.size();
  if (m == 0 || m > 20) {
    throw Error("sample_size", "exhaustive enumeration needs 1 <= m <= 20");
  }
  std::vector<double> p(m);
  std::vector<double> routed(m);
  for (std::size_t i = 0; i < m; ++i) {
    p[i] = records[i].query_prob.value_or(1.0);
    routed[i] = records[i].losses.at(route(thresholds, records[i].score));
  }
  double expectation = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    double prob = 1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1u << i)) {
        prob *= p[i];
        total += routed[i] / p[i];
      } else {
        prob *= 1.0 - p[i];
      }
    }
    expectation += prob * total / static_cast<double>(m);
  }
  return expectation;
}

double mc_slack(double rate, std::size_t trials) {
  return 3.0 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
}

}  // namespace annoroute
