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

#ifndef ANNOROUTE_HARNESS_HPP_
#define ANNOROUTE_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "annoroute/baselines.hpp"
#include "annoroute/calibration.hpp"
#include "annoroute/rng.hpp"
#include "annoroute/types.hpp"

namespace annoroute {

// Output tokens charged for an expert annotation under token pricing.
inline constexpr double kExpertTokenBudget = 32768.0;

struct ScoreDistribution {
  enum class Kind { kUniform, kBeta };
  Kind kind = Kind::kUniform;
  double a = 1.0;
  double b = 1.0;

  bool operator==(const ScoreDistribution&) const = default;
};

// Error probability of a source as a function of the score:
// clamp(floor + scale * score^power, 0, 1).
struct LossModel {
  double floor = 0.0;
  double scale = 0.0;
  double power = 1.0;

  double probability(double score) const;
  // Integral of probability() over [lo, hi].
  double integral(double lo, double hi) const;

  bool operator==(const LossModel&) const = default;
};

// Per-source costs. Every kind is affine in the score, so ordering at the
// endpoints implies ordering everywhere.
struct CostModel {
  enum class Kind { kConstant, kLinear, kApi };
  Kind kind = Kind::kConstant;
  std::vector<double> base;   // constant values, or linear intercepts
  std::vector<double> slope;  // linear only
  // API pricing: price_in * tokens_in + price_out * tokens_out, with
  // tokens_out = tokens_out_base + tokens_out_slope * score.
  std::vector<double> price_in;
  std::vector<double> price_out;
  std::vector<double> tokens_in;
  std::vector<double> tokens_out_base;
  std::vector<double> tokens_out_slope;

  std::vector<double> costs_at(double score) const;
  std::size_t num_sources() const;

  // Token pricing: cost is the number of generated tokens, the expert is
  // charged kExpertTokenBudget.
  static CostModel tokens(std::vector<double> tokens_out_base,
                          std::vector<double> tokens_out_slope);

  bool operator==(const CostModel&) const = default;
};

double api_cost(double price_in, double tokens_in, double price_out,
                double tokens_out);

struct SyntheticScenario {
  std::size_t num_sources = 3;
  ScoreDistribution score;
  // One loss model per non-ground-truth source; error probabilities must be
  // non-increasing along the ladder.
  std::vector<LossModel> losses;
  CostModel cost;
  std::size_t n_cal = 300;
  std::size_t n_test = 1000;
  std::uint64_t seed = 0;

  void validate() const;

  // Uniform scores, quadratic error curves, constant costs 1, 2, ..., and 8
  // for the expert.
  static SyntheticScenario default_for(std::size_t num_sources);

  bool operator==(const SyntheticScenario&) const = default;
};

// Draws i.i.d. records from a scenario and evaluates the true risk of any
// threshold vector, in closed form for uniform scores and by a 10^6-sample
// plug-in otherwise.
class SyntheticGenerator {
 public:
  explicit SyntheticGenerator(SyntheticScenario scenario);

  std::vector<AnnotationRecord> draw(std::size_t n, Rng& rng,
                                     const std::string& id_prefix) const;
  double true_risk(const ThresholdVector& thresholds) const;
  bool closed_form() const noexcept { return plugin_scores_.empty(); }
  const SyntheticScenario& scenario() const noexcept { return scenario_; }
  SourceLadder ladder() const {
    return SourceLadder::with_size(scenario_.num_sources);
  }

 private:
  double draw_score(Rng& rng) const;

  SyntheticScenario scenario_;
  std::vector<double> plugin_scores_;
  std::vector<std::vector<double>> plugin_prefix_;
};

struct GeneratedData {
  std::vector<AnnotationRecord> calibration;
  std::vector<AnnotationRecord> test;
  std::shared_ptr<const SyntheticGenerator> truth;

  double true_risk(const ThresholdVector& thresholds) const {
    return truth->true_risk(thresholds);
  }
};

GeneratedData generate(const SyntheticScenario& scenario);

struct TrialRecord {
  std::size_t trial = 0;
  std::vector<double> thresholds;
  double true_risk = 0.0;
  double test_error = 0.0;
  double cost_savings = 0.0;
  bool fallback = false;
  bool violation = false;

  bool operator==(const TrialRecord&) const = default;
};

struct CoverageReport {
  Method method = Method::kHypac;
  CalibrationConfig config;
  SyntheticScenario scenario;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double violation_rate = 0.0;
  double mean_cost_savings = 0.0;
  double mean_error = 0.0;
  double mean_true_risk = 0.0;
  std::vector<TrialRecord> per_trial;

  bool operator==(const CoverageReport&) const = default;
};

// Repeats: fresh calibration draw, calibration with `method`, true-risk check
// of the selected thresholds against epsilon, and test-set error and savings.
// pac-labeling runs on the cheapest source plus ground truth. Per-trial seeds
// derive from scenario.seed and config.seed, so reruns are bit-identical.
CoverageReport pac_coverage_experiment(const SyntheticScenario& scenario,
                                       const CalibrationConfig& config,
                                       std::size_t trials,
                                       Method method = Method::kHypac);

struct BoundCheckReport {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double fraction = 0.0;
  double theorem_bound = 0.0;
  double slack = 0.0;
  std::size_t test_size = 0;
  bool passed = false;
};

// Fraction of trials whose test-set empirical risk is at most epsilon + slack,
// against 1 - alpha - (1 - alpha) exp(-2 N t^2 / B^2).
BoundCheckReport empirical_bound_check(const SyntheticScenario& scenario,
                                       const CalibrationConfig& config,
                                       std::size_t trials, double slack,
                                       std::size_t test_size,
                                       double mc_tolerance = 0.02);

// Exhaustive minimum-cost feasible row, written independently of
// select_thresholds. nullopt when no row is feasible.
std::optional<std::size_t> brute_force_optimal(const Surface& surface,
                                               double epsilon);

enum class MonotonicityMode { kCost, kRiskTop, kRiskDominance };

struct MonotonicityResult {
  bool passed = true;
  std::size_t pairs_checked = 0;
  std::string counterexample;
};

// Compares every pair of grid-adjacent cells.
MonotonicityResult monotonicity_check(std::span<const AnnotationRecord> records,
                                      std::span<const double> grid,
                                      std::size_t num_sources,
                                      MonotonicityMode mode);

struct ComparisonRow {
  Method method = Method::kHypac;
  std::size_t trials = 0;
  double mean_error = 0.0;
  double violation_rate = 0.0;
  double mean_cost_savings = 0.0;
};

std::vector<ComparisonRow> method_comparison(const SyntheticScenario& scenario,
                                             const CalibrationConfig& config,
                                             std::size_t trials,
                                             std::span<const Method> methods);

// Fraction of draws whose UCB at fixed thresholds covers the true risk.
double fixed_threshold_coverage(const SyntheticScenario& scenario,
                                const CalibrationConfig& config,
                                const ThresholdVector& thresholds,
                                std::size_t sample_size, std::size_t trials);

// Exact expectation of the importance-weighted risk over all 2^m query masks,
// using each record's query_prob. m <= 20.
double exhaustive_is_expectation(std::span<const AnnotationRecord> records,
                                 const ThresholdVector& thresholds);

// Three standard errors of a Monte Carlo proportion.
double mc_slack(double rate, std::size_t trials);

}  // namespace annoroute

#endif  // ANNOROUTE_HARNESS_HPP_
