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

#ifndef ANNOROUTE_CALIBRATION_HPP_
#define ANNOROUTE_CALIBRATION_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "annoroute/estimation.hpp"
#include "annoroute/routing.hpp"
#include "annoroute/types.hpp"

namespace annoroute {

// Sorted, deduplicated threshold candidates in [0, 1], always containing 0
// and 1.
std::vector<double> build_grid(const GridSpec& spec,
                               std::span<const double> scores);

// Number of non-decreasing (K-1)-tuples over a grid of `grid_size` values,
// C(grid_size + K - 2, K - 1). Saturates at SIZE_MAX.
std::size_t cell_count(std::size_t grid_size, std::size_t num_sources);

// All non-decreasing (K-1)-tuples over the grid in lexicographic order of
// grid indices. Throws when the count exceeds `budget`.
std::vector<ThresholdVector> enumerate_cells(std::span<const double> grid,
                                             std::size_t num_sources,
                                             std::size_t budget);

struct Surface {
  std::size_t num_sources = 0;
  std::vector<SurfaceRow> rows;
};

Surface ucb_surface(const MaskedCalibrationSet& set,
                    std::span<const double> grid, std::size_t num_sources,
                    const CalibrationConfig& config);

// Minimum-cost cell among those with UCB <= epsilon. Equal costs go to the
// lexicographically largest reversed tuple (u_{K-1}, ..., u_1). When nothing
// is feasible the all-zeros vector is returned with fallback_used set.
CalibrationOutcome select_thresholds(const Surface& surface, double epsilon);

// Full calibration: query mask, grid, UCB surface and selection. Records that
// already carry query masks are used as given; otherwise masks are drawn with
// config.seed.
CalibrationOutcome calibrate(std::span<const AnnotationRecord> records,
                             const SourceLadder& ladder,
                             const CalibrationConfig& config);

std::vector<RoutingDecision> deploy(const CalibrationOutcome& outcome,
                                    std::span<const AnnotationRecord> records);

// Shared by calibrate and the baselines: validates records and returns the
// masked set.
MaskedCalibrationSet prepare_calibration_set(
    std::span<const AnnotationRecord> records, const SourceLadder& ladder,
    const CalibrationConfig& config);

}  // namespace annoroute

#endif  // ANNOROUTE_CALIBRATION_HPP_
