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

#ifndef ANNOROUTE_BASELINES_HPP_
#define ANNOROUTE_BASELINES_HPP_

#include <span>
#include <string>

#include "annoroute/types.hpp"

namespace annoroute {

enum class Method { kHypac, kPacLabeling, kCoannotating };

std::string to_string(Method method);
Method parse_method(const std::string& text);

// Two-stage PAC labeling: one model plus ground truth. Picks the largest grid
// value whose UCB is at most epsilon, or 0 when none is.
CalibrationOutcome pac_labeling_calibrate(
    std::span<const AnnotationRecord> records, const SourceLadder& ladder,
    const CalibrationConfig& config);

// Heuristic mean baseline: minimum empirical cost among three-source cells
// whose plain calibration risk is at most epsilon. Uses full labels and no
// confidence bound. Falls back to all zeros when no cell qualifies.
ThresholdVector coannotating_select(std::span<const AnnotationRecord> records,
                                    const SourceLadder& ladder, double epsilon,
                                    std::span<const double> grid);

// Same selection packaged as an outcome; ucb_at_selection holds the plain
// calibration risk of the chosen cell.
CalibrationOutcome coannotating_calibrate(
    std::span<const AnnotationRecord> records, const SourceLadder& ladder,
    const CalibrationConfig& config);

// Dispatches to calibrate() or one of the baselines.
CalibrationOutcome run_method(Method method,
                              std::span<const AnnotationRecord> records,
                              const SourceLadder& ladder,
                              const CalibrationConfig& config);

}  // namespace annoroute

#endif  // ANNOROUTE_BASELINES_HPP_
