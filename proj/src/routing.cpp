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

#include "annoroute/routing.hpp"

namespace annoroute {

std::size_t route(const ThresholdVector& thresholds, double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error("score_range", "score must lie in [0, 1]");
  }
  const auto u = thresholds.values();
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (score <= u[k]) return k;
  }
  return u.size();
}

RoutingDecision decide(const ThresholdVector& thresholds,
                       const AnnotationRecord& record) {
  const std::size_t k = route(thresholds, record.score);
  if (k >= record.costs.size() || k >= record.losses.size()) {
    throw Error("dimension_mismatch",
                "record '" + record.id + "' has fewer sources than thresholds");
  }
  return {k, record.costs[k], record.losses[k]};
}

double cost_of(const ThresholdVector& thresholds,
               const AnnotationRecord& record) {
  return decide(thresholds, record).cost;
}

double empirical_cost(const ThresholdVector& thresholds,
                      std::span<const AnnotationRecord> records) {
  if (records.empty()) throw Error("empty", "no records to average over");
  double total = 0.0;
  for (const auto& record : records) total += cost_of(thresholds, record);
  return total / static_cast<double>(records.size());
}

double empirical_risk(const ThresholdVector& thresholds,
                      std::span<const AnnotationRecord> records) {
  if (records.empty()) throw Error("empty", "no records to average over");
  double total = 0.0;
  for (const auto& record : records) total += decide(thresholds, record).loss;
  return total / static_cast<double>(records.size());
}

double cost_savings(const ThresholdVector& thresholds,
                    std::span<const AnnotationRecord> records) {
  if (records.empty()) throw Error("empty", "no records to average over");
  double routed = 0.0;
  double human = 0.0;
  for (const auto& record : records) {
    routed += cost_of(thresholds, record);
    human += record.costs.back();
  }
  if (!(human > 0.0)) {
    throw Error("zero_cost", "total ground-truth cost is zero");
  }
  return (1.0 - routed / human) * 100.0;
}

}  // namespace annoroute
