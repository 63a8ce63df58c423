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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "annoroute/calibration.hpp"
#include "annoroute/cli.hpp"
#include "annoroute/harness.hpp"
#include "annoroute/io.hpp"
#include "annoroute/routing.hpp"
#include "test_support.hpp"

namespace annoroute {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr double kAlpha = 0.05;
constexpr double kEpsilon = 0.05;
constexpr std::size_t kCoverageTrials = 1000;
constexpr double kCltCeiling = 0.07;
constexpr double kRuntimeLimitSeconds = 300.0;

struct Verdict {
  bool passed = true;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, v);
  return buffer;
}

void info(const std::string& line) { std::cout << "    " << line << std::endl; }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Threshold grid used for every coverage run: 231 cells at K=3, 286 at K=4.
GridSpec coverage_grid(std::size_t k) {
  return GridSpec::uniform(k == 3 ? 0.05 : 0.1);
}

CalibrationConfig default_config(std::size_t k, UcbKind ucb) {
  CalibrationConfig c;
  c.epsilon = kEpsilon;
  c.alpha = kAlpha;
  c.query_prob = 0.9;
  c.ucb = ucb;
  c.grid = coverage_grid(k);
  return c;
}

Verdict pac_coverage(std::size_t k) {
  Verdict v;
  const auto scenario = SyntheticScenario::default_for(k);
  const double limit = kAlpha + mc_slack(kAlpha, kCoverageTrials);
  std::ostringstream summary;
  for (auto ucb : {UcbKind::kHoeffding, UcbKind::kBernstein, UcbKind::kBetting,
                   UcbKind::kClt}) {
    const auto start = Clock::now();
    const auto report = pac_coverage_experiment(
        scenario, default_config(k, ucb), kCoverageTrials);
    const double elapsed = seconds_since(start);
    const double ceiling = ucb == UcbKind::kClt ? kCltCeiling : limit;
    const bool ok = report.violation_rate <= ceiling &&
                    elapsed < kRuntimeLimitSeconds;
    v.passed = v.passed && ok;
    info(to_string(ucb) + ": violation rate " + fmt(report.violation_rate) +
         " (limit " + fmt(ceiling) + "), mean true risk " +
         fmt(report.mean_true_risk) + ", savings " +
         fmt(report.mean_cost_savings, 2) + "%, " + fmt(elapsed, 1) + " s" +
         (ok ? "" : "  <-- over limit"));
    summary << to_string(ucb) << "=" << fmt(report.violation_rate, 3) << " ";
  }
  v.detail = summary.str();
  return v;
}

Verdict cost_optimality(std::size_t k) {
  Rng rng(derive_seed(2, k));
  std::size_t mismatches = 0;
  std::size_t largest = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t points = 2 + static_cast<std::size_t>(uniform01(rng) * 29.0);
    const auto grid = testing::uniform_grid(points);
    const auto surface = testing::random_surface(rng, grid, k);
    largest = std::max(largest, surface.rows.size());
    // Thresholds on the UCB column that give empty, sparse and dense
    // feasible sets.
    const double epsilon = std::array{0.0, 0.01, 0.05, 0.15}[rep % 4];
    const auto expected = brute_force_optimal(surface, epsilon);
    const auto got = select_thresholds(surface, epsilon);
    bool match = expected.has_value() != got.fallback_used;
    if (match && expected) {
      const auto& row = surface.rows[*expected];
      match = std::equal(row.thresholds.begin(), row.thresholds.end(),
                         got.thresholds.values().begin()) &&
              row.cost == got.empirical_cost;
    }
    mismatches += !match;
  }
  return {mismatches == 0, "200 surfaces, up to " + std::to_string(largest) +
                               " cells, " + std::to_string(mismatches) +
                               " mismatches"};
}

Verdict unbiasedness(std::size_t k) {
  Rng rng(derive_seed(3, k));
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t m = 2 + rep % 11;
    auto records = testing::random_records(rng, m, k, false);
    for (auto& r : records) r.query_prob = 0.2 + 0.8 * uniform01(rng);
    std::vector<double> u(k - 1);
    for (auto& x : u) x = uniform01(rng);
    std::sort(u.begin(), u.end());
    const ThresholdVector t(u);
    worst = std::max(worst, std::abs(exhaustive_is_expectation(records, t) -
                                     empirical_risk(t, records)));
  }
  std::ostringstream out;
  out << "100 fixtures, m in 2..12, max abs error " << worst;
  return {worst <= 1e-12, out.str()};
}

Verdict monotonicity(std::size_t k) {
  Rng rng(derive_seed(4, k));
  const auto grid = testing::uniform_grid(k == 3 ? 11 : 6);
  std::size_t failures = 0;
  std::size_t pairs = 0;
  std::string example;
  auto tally = [&](const MonotonicityResult& r) {
    pairs += r.pairs_checked;
    if (!r.passed) {
      ++failures;
      if (example.empty()) example = r.counterexample;
    }
  };
  for (int rep = 0; rep < 500; ++rep) {
    const auto records = testing::random_records(rng, 30, k, false);
    tally(monotonicity_check(records, grid, k, MonotonicityMode::kCost));
    tally(monotonicity_check(records, grid, k, MonotonicityMode::kRiskTop));
  }
  for (int rep = 0; rep < 500; ++rep) {
    const auto records = testing::random_records(rng, 30, k, true);
    tally(monotonicity_check(records, grid, k, MonotonicityMode::kRiskDominance));
  }
  std::string detail = "1500 checks, " + std::to_string(pairs) +
                       " adjacent pairs, " + std::to_string(failures) +
                       " counterexamples";
  if (!example.empty()) detail += " (first: " + example + ")";
  return {failures == 0, detail};
}

Verdict ucb_validity() {
  Verdict v;
  const auto scenario = SyntheticScenario::default_for(3);
  const ThresholdVector u({0.5, 0.9});
  constexpr std::size_t kDraws = 2000;
  const double floor = 1.0 - kAlpha - 3.0 * std::sqrt(kAlpha * (1 - kAlpha) / kDraws);
  std::ostringstream summary;
  auto check = [&](UcbKind ucb, std::size_t m) {
    const double cov = fixed_threshold_coverage(
        scenario, default_config(3, ucb), u, m, kDraws);
    const bool ok = cov >= floor;
    v.passed = v.passed && ok;
    info(to_string(ucb) + " m=" + std::to_string(m) + ": coverage " + fmt(cov) +
         " (floor " + fmt(floor) + ")");
    summary << to_string(ucb) << "@" << m << "=" << fmt(cov, 3) << " ";
  };
  check(UcbKind::kHoeffding, 300);
  check(UcbKind::kBernstein, 300);
  check(UcbKind::kBetting, 300);
  check(UcbKind::kBetting, 50);
  // Asymptotic bound, reported for reference only.
  const double clt = fixed_threshold_coverage(scenario, default_config(3, UcbKind::kClt),
                                              u, 300, kDraws);
  info("clt m=300 (reference): coverage " + fmt(clt) + " (asymptotic floor " +
       fmt(1.0 - kAlpha - 0.02) + ")");
  v.detail = summary.str();
  return v;
}

Verdict empirical_risk_bound() {
  const auto scenario = SyntheticScenario::default_for(3);
  const auto config = default_config(3, UcbKind::kClt);
  const auto report =
      empirical_bound_check(scenario, config, 1000, 0.05, 2000, 0.02);
  return {report.passed,
          "fraction " + fmt(report.fraction) + " vs bound " +
              fmt(report.theorem_bound) + " - 0.02 over " +
              std::to_string(report.trials) + " trials, N=2000, t=0.05"};
}

Verdict baseline_separation() {
  const fs::path path = fs::path(ANNOROUTE_FIXTURE_DIR) / "adversarial_scenario.json";
  const auto scenario = scenario_from_json(read_json(path));
  auto config = default_config(3, UcbKind::kBetting);
  const auto hypac = pac_coverage_experiment(scenario, config, kCoverageTrials,
                                             Method::kHypac);
  const auto co = pac_coverage_experiment(scenario, config, kCoverageTrials,
                                          Method::kCoannotating);
  const double limit = kAlpha + mc_slack(kAlpha, kCoverageTrials);
  info("hypac (betting): violation rate " + fmt(hypac.violation_rate) +
       ", savings " + fmt(hypac.mean_cost_savings, 2) + "%");
  info("coannotating: violation rate " + fmt(co.violation_rate) + ", savings " +
       fmt(co.mean_cost_savings, 2) + "%");
  return {co.violation_rate > 2 * kAlpha && hypac.violation_rate <= limit,
          "coannotating " + fmt(co.violation_rate, 3) + " > " +
              fmt(2 * kAlpha, 2) + ", hypac " + fmt(hypac.violation_rate, 3) +
              " <= " + fmt(limit)};
}

Verdict k_source_generalization() {
  Verdict v;
  const std::size_t cells = cell_count(11, 4);
  info("K=4 grid uniform:0.1, " + std::to_string(cells) + " cells");
  const std::pair<const char*, Verdict (*)(std::size_t)> parts[] = {
      {"1", pac_coverage}, {"2", cost_optimality}, {"3", unbiasedness},
      {"4", monotonicity}};
  for (const auto& [name, fn] : parts) {
    const Verdict sub = fn(4);
    info(std::string("K=4 criterion ") + name + ": " +
         (sub.passed ? "pass" : "fail") + " (" + sub.detail + ")");
    v.passed = v.passed && sub.passed;
    v.detail += std::string(name) + (sub.passed ? "=pass " : "=fail ");
  }
  v.passed = v.passed && cells <= 10000;
  return v;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "annoroute_acceptance";
  fs::create_directories(dir);
  std::string contents[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = dir / ("report_" + std::to_string(i) + ".json");
    fs::remove(out);
    std::ostringstream sink, err;
    const int status = run_cli({"annoroute", "validate", "--trials", "200",
                                "--grid", "uniform:0.1", "--seed", "1234",
                                "--ucb", "betting", "-o", out.string()},
                               sink, err);
    if (status != 0) return {false, "validate failed: " + err.str()};
    contents[i] = slurp(out);
  }
  const bool same = !contents[0].empty() && contents[0] == contents[1];
  return {same, std::to_string(contents[0].size()) + " bytes, " +
                    (same ? "identical" : "different")};
}

}  // namespace
}  // namespace annoroute

int main() {
  using namespace annoroute;
  struct Criterion {
    int id;
    const char* name;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {1, "PAC coverage, K=3", [] { return pac_coverage(3); }},
      {2, "cost optimality, K=3", [] { return cost_optimality(3); }},
      {3, "unbiasedness, K=3", [] { return unbiasedness(3); }},
      {4, "monotonicity, K=3", [] { return monotonicity(3); }},
      {5, "UCB validity at fixed thresholds", ucb_validity},
      {6, "empirical-risk bound", empirical_risk_bound},
      {7, "baseline separation", baseline_separation},
      {8, "K-source generalization (criteria 1-4 at K=4)", k_source_generalization},
      {9, "determinism of validate", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.passed;
    std::cout << (v.passed ? "PASS" : "FAIL") << " criterion " << c.id << ": "
              << c.name << " | " << v.detail << " [" << fmt(seconds_since(start), 1)
              << " s]" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed"
                              : std::to_string(failures) + " criterion(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
