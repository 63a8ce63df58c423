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

#ifndef ANNOROUTE_ESTIMATION_HPP_
#define ANNOROUTE_ESTIMATION_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "annoroute/types.hpp"

namespace annoroute {

// Calibration records that all carry a query mask Z_i and its probability p_i.
// Losses of records with Z_i = 0 are never read.
class MaskedCalibrationSet {
 public:
  explicit MaskedCalibrationSet(std::vector<AnnotationRecord> records);

  std::size_t size() const noexcept { return records_.size(); }
  std::span<const AnnotationRecord> records() const noexcept {
    return records_;
  }
  std::size_t queried_count() const noexcept;
  // Smallest p_i; equals the uniform p when no per-record probability is set.
  double min_query_prob() const noexcept { return min_query_prob_; }

 private:
  std::vector<AnnotationRecord> records_;
  double min_query_prob_ = 1.0;
};

// Draws Z_i ~ Bernoulli(p_i) for every record from a generator seeded with
// `seed`. p_i is the record's own query probability when present, otherwise
// the uniform `p`.
MaskedCalibrationSet apply_query_mask(std::vector<AnnotationRecord> records,
                                      double p, std::uint64_t seed);

// W_i = Z_i / p_i * loss of the routed source.
std::vector<double> weighted_losses(const MaskedCalibrationSet& set,
                                    const ThresholdVector& thresholds);

// Importance-weighted risk, the mean of the weighted losses.
double is_risk(const MaskedCalibrationSet& set,
               const ThresholdVector& thresholds);

// Sample standard deviation of the weighted losses (denominator m - 1).
double weighted_std(const MaskedCalibrationSet& set,
                    const ThresholdVector& thresholds);

double mean_of(std::span<const double> values);
// Welford variance with denominator n - 1; 0 for constant samples.
double sample_variance(std::span<const double> values);

}  // namespace annoroute

#endif  // ANNOROUTE_ESTIMATION_HPP_
