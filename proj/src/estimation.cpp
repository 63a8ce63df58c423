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

#include "annoroute/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "annoroute/rng.hpp"
#include "annoroute/routing.hpp"

namespace annoroute {

MaskedCalibrationSet::MaskedCalibrationSet(std::vector<AnnotationRecord> records)
    : records_(std::move(records)) {
  if (records_.empty()) {
    throw Error("empty", "calibration set must not be empty");
  }
  for (const auto& record : records_) {
    if (!record.query_mask.has_value() || !record.query_prob.has_value()) {
      throw Error("query_mask", "record '" + record.id +
                                    "' has no query mask or probability");
    }
    const double p = *record.query_prob;
    if (!(p > 0.0 && p <= 1.0)) {
      throw Error("query_prob", "record '" + record.id +
                                    "': query probability must lie in (0, 1]");
    }
    min_query_prob_ = std::min(min_query_prob_, p);
  }
}

std::size_t MaskedCalibrationSet::queried_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(),
                    [](const AnnotationRecord& r) { return *r.query_mask; }));
}

MaskedCalibrationSet apply_query_mask(std::vector<AnnotationRecord> records,
                                      double p, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error("query_prob", "sampling probability must lie in (0, 1]");
  }
  Rng rng(seed);
  for (auto& record : records) {
    const double prob = record.query_prob.value_or(p);
    record.query_prob = prob;
    record.query_mask = uniform01(rng) < prob;
  }
  return MaskedCalibrationSet(std::move(records));
}

std::vector<double> weighted_losses(const MaskedCalibrationSet& set,
                                    const ThresholdVector& thresholds) {
  std::vector<double> w;
  w.reserve(set.size());
  for (const auto& record : set.records()) {
    if (!*record.query_mask) {
      w.push_back(0.0);
      continue;
    }
    const std::size_t k = route(thresholds, record.score);
    w.push_back(record.losses.at(k) / *record.query_prob);
  }
  return w;
}

double mean_of(std::span<const double> values) {
  if (values.empty()) throw Error("empty", "mean of an empty sample");
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error("sample_size", "sample variance needs at least 2 values");
  }
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  return std::max(0.0, m2 / static_cast<double>(n - 1));
}

double is_risk(const MaskedCalibrationSet& set,
               const ThresholdVector& thresholds) {
  return mean_of(weighted_losses(set, thresholds));
}

double weighted_std(const MaskedCalibrationSet& set,
                    const ThresholdVector& thresholds) {
  if (set.size() < 2) {
    throw Error("sample_size", "standard deviation needs at least 2 records");
  }
  return std::sqrt(sample_variance(weighted_losses(set, thresholds)));
}

}  // namespace annoroute
