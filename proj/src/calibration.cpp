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

#include "annoroute/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "annoroute/bounds.hpp"

namespace annoroute {
namespace {

void normalize_grid(std::vector<double>& grid) {
  grid.push_back(0.0);
  grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
}

// Reversed-tuple lexicographic comparison: true when a > b.
bool reversed_greater(const std::vector<double>& a,
                      const std::vector<double>& b) {
  return std::lexicographical_compare(b.rbegin(), b.rend(), a.rbegin(),
                                      a.rend());
}

}  // namespace

std::vector<double> build_grid(const GridSpec& spec,
                               std::span<const double> scores) {
  std::vector<double> grid;
  switch (spec.mode) {
    case GridSpec::Mode::kUniform: {
      if (!(spec.step > 0.0 && spec.step <= 1.0)) {
        throw Error("grid", "uniform grid step must lie in (0, 1]");
      }
      const auto n = static_cast<std::size_t>(std::floor(1.0 / spec.step + 1e-9));
      for (std::size_t k = 0; k <= n; ++k) {
        // Snap to 1e-12 so that 3 * 0.1 is stored as 0.3.
        const double v = std::round(static_cast<double>(k) * spec.step * 1e12) / 1e12;
        grid.push_back(std::min(v, 1.0));
      }
      break;
    }
    case GridSpec::Mode::kFromScores:
      if (scores.empty()) {
        throw Error("grid", "score-based grid needs at least one score");
      }
      for (double s : scores) {
        if (!(s >= 0.0 && s <= 1.0)) {
          throw Error("grid", "grid values must lie in [0, 1]");
        }
        grid.push_back(s);
      }
      break;
    case GridSpec::Mode::kExplicit:
      for (double v : spec.values) {
        if (!(v >= 0.0 && v <= 1.0)) {
          throw Error("grid", "grid values must lie in [0, 1]");
        }
        grid.push_back(v);
      }
      break;
  }
  normalize_grid(grid);
  return grid;
}

std::size_t cell_count(std::size_t grid_size, std::size_t num_sources) {
  if (num_sources < 2 || grid_size == 0) return 0;
  // C(n, r) with n = g + K - 2, r = K - 1, built incrementally so every
  // intermediate value is itself a binomial coefficient.
  const std::size_t r = num_sources - 1;
  const std::size_t n = grid_size + num_sources - 2;
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t result = 1;
  for (std::size_t i = 1; i <= r; ++i) {
    const std::size_t factor = n - r + i;
    if (result > kMax / factor) return kMax;
    result = result * factor / i;
  }
  return result;
}

std::vector<ThresholdVector> enumerate_cells(std::span<const double> grid,
                                             std::size_t num_sources,
                                             std::size_t budget) {
  if (num_sources < 2) throw Error("ladder", "need at least 2 sources");
  if (grid.empty()) throw Error("grid", "empty threshold grid");
  const std::size_t count = cell_count(grid.size(), num_sources);
  if (count > budget) {
    throw Error("cell_budget", std::to_string(count) +
                                   " threshold cells exceed the budget of " +
                                   std::to_string(budget));
  }
  const std::size_t dims = num_sources - 1;
  std::vector<ThresholdVector> cells;
  cells.reserve(count);
  std::vector<std::size_t> idx(dims, 0);
  std::vector<double> values(dims);
  while (true) {
    for (std::size_t d = 0; d < dims; ++d) values[d] = grid[idx[d]];
    cells.emplace_back(values);
    // Odometer over non-decreasing index tuples.
    std::size_t d = dims;
    while (d > 0 && idx[d - 1] + 1 == grid.size()) --d;
    if (d == 0) break;
    ++idx[d - 1];
    for (std::size_t j = d; j < dims; ++j) idx[j] = idx[d - 1];
  }
  return cells;
}

Surface ucb_surface(const MaskedCalibrationSet& set,
                    std::span<const double> grid, std::size_t num_sources,
                    const CalibrationConfig& config) {
  const auto cells = enumerate_cells(grid, num_sources, config.cell_budget);
  Surface surface;
  surface.num_sources = num_sources;
  surface.rows.reserve(cells.size());
  const UcbInput base{{}, config.alpha, config.loss_bound, set.min_query_prob()};
  for (const auto& cell : cells) {
    const auto w = weighted_losses(set, cell);
    SurfaceRow row;
    row.thresholds.assign(cell.values().begin(), cell.values().end());
    row.risk_is = mean_of(w);
    row.std_w = w.size() >= 2 ? std::sqrt(sample_variance(w)) : 0.0;
    UcbInput input = base;
    input.weighted_losses = w;
    row.ucb = compute_ucb(config.ucb, input, config.betting);
    row.cost = empirical_cost(cell, set.records());
    surface.rows.push_back(std::move(row));
  }
  return surface;
}

CalibrationOutcome select_thresholds(const Surface& surface, double epsilon) {
  if (surface.rows.empty()) throw Error("empty", "empty UCB surface");
  const std::size_t dims = surface.rows.front().thresholds.size();
  CalibrationOutcome outcome;
  const SurfaceRow* best = nullptr;
  const SurfaceRow* zero_cell = nullptr;
  for (const auto& row : surface.rows) {
    if (std::all_of(row.thresholds.begin(), row.thresholds.end(),
                    [](double u) { return u == 0.0; })) {
      zero_cell = &row;
    }
    if (!(row.ucb <= epsilon)) continue;
    ++outcome.feasible_count;
    if (best == nullptr || row.cost < best->cost ||
        (row.cost == best->cost &&
         reversed_greater(row.thresholds, best->thresholds))) {
      best = &row;
    }
  }
  if (best != nullptr) {
    outcome.thresholds = ThresholdVector(best->thresholds);
    outcome.ucb_at_selection = best->ucb;
    outcome.empirical_cost = best->cost;
    return outcome;
  }
  outcome.thresholds = ThresholdVector::zeros(dims);
  outcome.fallback_used = true;
  if (zero_cell != nullptr) {
    outcome.ucb_at_selection = zero_cell->ucb;
    outcome.empirical_cost = zero_cell->cost;
  } else {
    outcome.ucb_at_selection = std::numeric_limits<double>::quiet_NaN();
    outcome.empirical_cost = std::numeric_limits<double>::quiet_NaN();
  }
  return outcome;
}

MaskedCalibrationSet prepare_calibration_set(
    std::span<const AnnotationRecord> records, const SourceLadder& ladder,
    const CalibrationConfig& config) {
  config.validate();
  if (records.size() < 2) {
    throw Error("sample_size", "calibration needs at least 2 records");
  }
  std::vector<AnnotationRecord> validated;
  validated.reserve(records.size());
  std::size_t masked = 0;
  for (const auto& record : records) {
    validated.push_back(validate_record(record, ladder, config.loss_bound));
    if (record.query_mask.has_value()) ++masked;
  }
  if (masked == validated.size()) {
    return MaskedCalibrationSet(std::move(validated));
  }
  if (masked != 0) {
    throw Error("query_mask",
                "either all calibration records carry a query mask or none do");
  }
  return apply_query_mask(std::move(validated), config.query_prob, config.seed);
}

CalibrationOutcome calibrate(std::span<const AnnotationRecord> records,
                             const SourceLadder& ladder,
                             const CalibrationConfig& config) {
  const auto set = prepare_calibration_set(records, ladder, config);
  std::vector<double> scores;
  scores.reserve(set.size());
  for (const auto& record : set.records()) scores.push_back(record.score);
  const auto grid = build_grid(config.grid, scores);
  auto surface = ucb_surface(set, grid, ladder.size(), config);
  auto outcome = select_thresholds(surface, config.epsilon);
  outcome.queried_count = set.queried_count();
  outcome.calibration_size = set.size();
  if (config.keep_surface) outcome.cells = std::move(surface.rows);
  return outcome;
}

std::vector<RoutingDecision> deploy(const CalibrationOutcome& outcome,
                                    std::span<const AnnotationRecord> records) {
  std::vector<RoutingDecision> decisions;
  decisions.reserve(records.size());
  for (const auto& record : records) {
    decisions.push_back(decide(outcome.thresholds, record));
  }
  return decisions;
}

}  // namespace annoroute
