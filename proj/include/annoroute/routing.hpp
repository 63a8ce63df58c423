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

#ifndef ANNOROUTE_ROUTING_HPP_
#define ANNOROUTE_ROUTING_HPP_

#include <cstddef>
#include <span>

#include "annoroute/types.hpp"

namespace annoroute {

struct RoutingDecision {
  std::size_t source_index = 0;
  double cost = 0.0;
  double loss = 0.0;

  bool operator==(const RoutingDecision&) const = default;
};

// Index of the source that annotates an input with the given score: the
// smallest k with score <= u[k], or the ground-truth source K-1 when the score
// exceeds every threshold. Ties at a threshold go to the cheaper source.
std::size_t route(const ThresholdVector& thresholds, double score);

RoutingDecision decide(const ThresholdVector& thresholds,
                       const AnnotationRecord& record);

double cost_of(const ThresholdVector& thresholds,
               const AnnotationRecord& record);

// Mean routed cost over the records.
double empirical_cost(const ThresholdVector& thresholds,
                      std::span<const AnnotationRecord> records);

// Mean routed loss over fully labeled records.
double empirical_risk(const ThresholdVector& thresholds,
                      std::span<const AnnotationRecord> records);

// Percentage reduction of routed cost relative to sending every record to the
// ground-truth source. Negative when routing costs more.
double cost_savings(const ThresholdVector& thresholds,
                    std::span<const AnnotationRecord> records);

}  // namespace annoroute

#endif  // ANNOROUTE_ROUTING_HPP_
