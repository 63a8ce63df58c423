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

#ifndef ANNOROUTE_TYPES_HPP_
#define ANNOROUTE_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace annoroute {

// Every error raised by the library carries a short machine-readable code
// (e.g. "cost_order") next to the human-readable message. The CLI prints
// both on one line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct SourceSpec {
  std::string name;
  bool is_ground_truth = false;

  bool operator==(const SourceSpec&) const = default;
};

// The K annotation sources ordered from cheapest to most expensive. The last
// source is the ground-truth (expert) source and incurs zero loss.
class SourceLadder {
 public:
  explicit SourceLadder(std::vector<SourceSpec> sources);

  // "source_0", ..., "source_{K-2}", "human".
  static SourceLadder with_size(std::size_t k);

  std::size_t size() const noexcept { return sources_.size(); }
  const SourceSpec& operator[](std::size_t i) const { return sources_[i]; }
  const std::vector<SourceSpec>& sources() const noexcept { return sources_; }

  bool operator==(const SourceLadder&) const = default;

 private:
  std::vector<SourceSpec> sources_;
};

struct AnnotationRecord {
  std::string id;
  // Uncertainty score of the input, higher means harder.
  double score = 0.0;
  // Per-source loss against ground truth; the last entry is always 0.
  std::vector<double> losses;
  // Per-source annotation cost, non-decreasing along the ladder.
  std::vector<double> costs;
  // Whether ground truth was queried for this record (calibration only).
  std::optional<bool> query_mask;
  std::optional<double> query_prob;

  std::size_t num_sources() const noexcept { return losses.size(); }

  bool operator==(const AnnotationRecord&) const = default;
};

// Checks every record invariant against the ladder length and the loss bound
// and returns the record unchanged. Throws Error otherwise.
AnnotationRecord validate_record(const AnnotationRecord& record,
                                 const SourceLadder& ladder, double loss_bound);

// Non-decreasing routing thresholds u[0] <= ... <= u[K-2], all in [0, 1].
// Construction rejects unsorted input instead of sorting it.
class ThresholdVector {
 public:
  explicit ThresholdVector(std::vector<double> values);

  static ThresholdVector zeros(std::size_t num_thresholds);
  static ThresholdVector ones(std::size_t num_thresholds);

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t num_sources() const noexcept { return values_.size() + 1; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const ThresholdVector&) const = default;

 private:
  std::vector<double> values_;
};

enum class UcbKind { kClt, kHoeffding, kBernstein, kBetting };

std::string to_string(UcbKind kind);
UcbKind parse_ucb_kind(const std::string& text);

// Threshold grid description. The realized grid always contains 0 and 1.
struct GridSpec {
  enum class Mode { kUniform, kFromScores, kExplicit };

  Mode mode = Mode::kFromScores;
  double step = 0.0;           // kUniform
  std::vector<double> values;  // kExplicit

  static GridSpec uniform(double step);
  static GridSpec from_scores();
  static GridSpec explicit_values(std::vector<double> values);

  bool operator==(const GridSpec&) const = default;
};

// "uniform:0.05", "from-scores"; explicit grids are written as
// "values:0.1,0.5".
std::string to_string(const GridSpec& grid);
GridSpec parse_grid_spec(const std::string& text);

// Denominator used for the betting fraction lambda_t.
enum class BettingLambda { kTotalSamples, kRunningIndex };

struct BettingOptions {
  std::size_t grid_points = 1000;
  BettingLambda lambda = BettingLambda::kTotalSamples;

  bool operator==(const BettingOptions&) const = default;
};

struct CalibrationConfig {
  double epsilon = 0.05;
  double alpha = 0.05;
  double query_prob = 0.9;
  double loss_bound = 1.0;
  GridSpec grid = GridSpec::from_scores();
  UcbKind ucb = UcbKind::kClt;
  std::uint64_t seed = 0;
  std::size_t cell_budget = 1000000;
  BettingOptions betting;
  // Keep the full per-cell table in the outcome.
  bool keep_surface = false;

  // Throws Error("config", ...) when a field is out of range.
  void validate() const;

  bool operator==(const CalibrationConfig&) const = default;
};

struct SurfaceRow {
  std::vector<double> thresholds;
  double risk_is = 0.0;
  double std_w = 0.0;
  double ucb = 0.0;
  double cost = 0.0;

  bool operator==(const SurfaceRow&) const = default;
};

struct CalibrationOutcome {
  ThresholdVector thresholds = ThresholdVector::zeros(1);
  std::size_t feasible_count = 0;
  double ucb_at_selection = 0.0;
  double empirical_cost = 0.0;
  bool fallback_used = false;
  // Ground-truth queries spent during calibration and the calibration size.
  std::size_t queried_count = 0;
  std::size_t calibration_size = 0;
  std::vector<SurfaceRow> cells;

  bool operator==(const CalibrationOutcome&) const = default;
};

}  // namespace annoroute

#endif  // ANNOROUTE_TYPES_HPP_
