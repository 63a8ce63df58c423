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

#include "annoroute/baselines.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "annoroute/calibration.hpp"
#include "annoroute/routing.hpp"

namespace annoroute {
namespace {

std::vector<double> scores_of(std::span<const AnnotationRecord> records) {
  std::vector<double> scores;
  scores.reserve(records.size());
  for (const auto& record : records) scores.push_back(record.score);
  return scores;
}

struct CoannotatingChoice {
  ThresholdVector thresholds = ThresholdVector::zeros(2);
  std::size_t feasible_count = 0;
  double risk = 0.0;
  double cost = 0.0;
  bool fallback = true;
};

CoannotatingChoice coannotating_scan(std::span<const AnnotationRecord> records,
                                     const SourceLadder& ladder,
                                     double epsilon,
                                     std::span<const double> grid) {
  if (ladder.size() != 3) {
    throw Error("method_combination",
                "coannotating needs exactly 3 sources, got " +
                    std::to_string(ladder.size()));
  }
  if (records.empty()) throw Error("empty", "no calibration records");
  CoannotatingChoice choice;
  const auto cells =
      enumerate_cells(grid, 3, std::numeric_limits<std::size_t>::max());
  bool have_best = false;
  for (const auto& cell : cells) {
    const double risk = empirical_risk(cell, records);
    if (!(risk <= epsilon)) continue;
    ++choice.feasible_count;
    const double cost = empirical_cost(cell, records);
    const bool better =
        !have_best || cost < choice.cost ||
        (cost == choice.cost &&
         (cell[1] > choice.thresholds[1] ||
          (cell[1] == choice.thresholds[1] && cell[0] > choice.thresholds[0])));
    if (better) {
      have_best = true;
      choice.thresholds = cell;
      choice.risk = risk;
      choice.cost = cost;
    }
  }
  choice.fallback = !have_best;
  if (!have_best) {
    choice.risk = empirical_risk(choice.thresholds, records);
    choice.cost = empirical_cost(choice.thresholds, records);
  }
  return choice;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kHypac:
      return "hypac";
    case Method::kPacLabeling:
      return "pac-labeling";
    case Method::kCoannotating:
      return "coannotating";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  if (text == "hypac") return Method::kHypac;
  if (text == "pac-labeling") return Method::kPacLabeling;
  if (text == "coannotating") return Method::kCoannotating;
  throw Error("method", "unknown method '" + text + "'");
}

CalibrationOutcome pac_labeling_calibrate(
    std::span<const AnnotationRecord> records, const SourceLadder& ladder,
    const CalibrationConfig& config) {
  if (ladder.size() != 2) {
    throw Error("method_combination",
                "pac-labeling needs exactly 2 sources, got " +
                    std::to_string(ladder.size()));
  }
  const auto set = prepare_calibration_set(records, ladder, config);
  const auto scores = scores_of(set.records());
  const auto grid = build_grid(config.grid, scores);
  auto surface = ucb_surface(set, grid, 2, config);

  CalibrationOutcome outcome;
  const SurfaceRow* chosen = nullptr;
  const SurfaceRow* zero_cell = nullptr;
  for (const auto& row : surface.rows) {
    if (row.thresholds[0] == 0.0) zero_cell = &row;
    if (row.ucb <= config.epsilon) {
      ++outcome.feasible_count;
      if (chosen == nullptr || row.thresholds[0] > chosen->thresholds[0]) {
        chosen = &row;
      }
    }
  }
  outcome.fallback_used = chosen == nullptr;
  if (chosen == nullptr) chosen = zero_cell;
  outcome.thresholds = ThresholdVector(chosen->thresholds);
  outcome.ucb_at_selection = chosen->ucb;
  outcome.empirical_cost = chosen->cost;
  outcome.queried_count = set.queried_count();
  outcome.calibration_size = set.size();
  if (config.keep_surface) outcome.cells = std::move(surface.rows);
  return outcome;
}

ThresholdVector coannotating_select(std::span<const AnnotationRecord> records,
                                    const SourceLadder& ladder, double epsilon,
                                    std::span<const double> grid) {
  return coannotating_scan(records, ladder, epsilon, grid).thresholds;
}

CalibrationOutcome coannotating_calibrate(
    std::span<const AnnotationRecord> records, const SourceLadder& ladder,
    const CalibrationConfig& config) {
  config.validate();
  std::vector<AnnotationRecord> validated;
  validated.reserve(records.size());
  for (const auto& record : records) {
    validated.push_back(validate_record(record, ladder, config.loss_bound));
  }
  const auto grid = build_grid(config.grid, scores_of(validated));
  if (cell_count(grid.size(), ladder.size()) > config.cell_budget) {
    throw Error("cell_budget", "threshold cells exceed the budget");
  }
  const auto choice = coannotating_scan(validated, ladder, config.epsilon, grid);
  CalibrationOutcome outcome;
  outcome.thresholds = choice.thresholds;
  outcome.feasible_count = choice.feasible_count;
  outcome.ucb_at_selection = choice.risk;
  outcome.empirical_cost = choice.cost;
  outcome.fallback_used = choice.fallback;
  // Every calibration label is consumed.
  outcome.queried_count = validated.size();
  outcome.calibration_size = validated.size();
  return outcome;
}

CalibrationOutcome run_method(Method method,
                              std::span<const AnnotationRecord> records,
                              const SourceLadder& ladder,
                              const CalibrationConfig& config) {
  switch (method) {
    case Method::kHypac:
      return calibrate(records, ladder, config);
    case Method::kPacLabeling:
      return pac_labeling_calibrate(records, ladder, config);
    case Method::kCoannotating:
      return coannotating_calibrate(records, ladder, config);
  }
  throw Error("method", "unknown method");
}

}  // namespace annoroute
