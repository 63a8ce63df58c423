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

#ifndef ANNOROUTE_IO_HPP_
#define ANNOROUTE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "annoroute/baselines.hpp"
#include "annoroute/harness.hpp"
#include "annoroute/routing.hpp"
#include "annoroute/types.hpp"
#include "json.hpp"

namespace annoroute {

enum class RecordFormat { kJsonLines, kCsv };

// ".csv" selects CSV, everything else JSON lines.
RecordFormat format_for_path(const std::filesystem::path& path);

// Reads and validates records in file order. K is taken from the first record
// (or `expected_sources` when given) and must be the same on every line.
// Errors name the offending line.
std::vector<AnnotationRecord> parse_records(
    const std::filesystem::path& path, RecordFormat format, double loss_bound,
    std::optional<std::size_t> expected_sources = std::nullopt);

void write_records(std::span<const AnnotationRecord> records,
                   const std::filesystem::path& path, RecordFormat format);

// "%.17g"; round-trips every finite double.
std::string format_number(double value);

nlohmann::json to_json(const CalibrationConfig& config);
CalibrationConfig config_from_json(const nlohmann::json& json);

nlohmann::json to_json(const SyntheticScenario& scenario);
SyntheticScenario scenario_from_json(const nlohmann::json& json);

// FNV-1a of the canonical JSON dump of the configuration, as 16 hex digits.
std::string config_hash(const CalibrationConfig& config);

// Serialized run settings: calibration config, ladder, method and paths.
struct RunConfig {
  CalibrationConfig calibration;
  std::optional<SourceLadder> ladder;
  Method method = Method::kHypac;
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> output;
};

nlohmann::json to_json(const RunConfig& run);
RunConfig run_config_from_json(const nlohmann::json& json);

struct OutcomeFile {
  Method method = Method::kHypac;
  CalibrationConfig config;
  SourceLadder ladder = SourceLadder::with_size(2);
  CalibrationOutcome outcome;

  bool operator==(const OutcomeFile&) const = default;
};

nlohmann::json to_json(const OutcomeFile& file);
OutcomeFile outcome_from_json(const nlohmann::json& json);

nlohmann::json to_json(const CoverageReport& report);
CoverageReport report_from_json(const nlohmann::json& json);

// Columns of the per-cell CSV.
inline constexpr const char* kCellCsvHeader =
    "threshold_tuple,risk_is,std_w,ucb,cost,config_hash,seed";
// Columns of the per-trial CSV.
inline constexpr const char* kTrialCsvHeader =
    "trial,thresholds,true_risk,test_error,cost_savings,fallback,violation,"
    "config_hash,seed";
// Columns of the comparison / summary CSV.
inline constexpr const char* kSummaryCsvHeader =
    "method,ucb,epsilon,alpha,trials,violations,violation_rate,mean_error,"
    "mean_true_risk,mean_cost_savings,config_hash,seed";
inline constexpr const char* kDecisionCsvHeader =
    "id,score,source_index,source_name,cost,loss,config_hash,seed";

void write_json(const nlohmann::json& json, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

// Threshold tuples are written as "u0;u1;...". Every row carries the hash and
// seed of the configuration that produced it.
void write_cells_csv(std::span<const SurfaceRow> cells,
                     const CalibrationConfig& config,
                     const std::filesystem::path& path);
void write_trials_csv(const CoverageReport& report,
                      const std::filesystem::path& path);
void write_summary_csv(std::span<const CoverageReport> reports,
                       const std::filesystem::path& path);
void write_decisions_csv(std::span<const AnnotationRecord> records,
                         std::span<const RoutingDecision> decisions,
                         const SourceLadder& ladder,
                         const CalibrationConfig& config,
                         const std::filesystem::path& path);

}  // namespace annoroute

#endif  // ANNOROUTE_IO_HPP_
