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

#include "annoroute/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace annoroute {
namespace {

std::string format_index(std::size_t k) { return std::to_string(k); }

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

SourceLadder::SourceLadder(std::vector<SourceSpec> sources)
    : sources_(std::move(sources)) {
  if (sources_.size() < 2) {
    throw Error("ladder", "a source ladder needs at least 2 sources");
  }
  for (std::size_t k = 0; k + 1 < sources_.size(); ++k) {
    if (sources_[k].is_ground_truth) {
      throw Error("ladder", "only the last source may be ground truth (source " +
                                format_index(k) + " is marked)");
    }
  }
  if (!sources_.back().is_ground_truth) {
    throw Error("ladder", "the last source must be the ground-truth source");
  }
}

SourceLadder SourceLadder::with_size(std::size_t k) {
  std::vector<SourceSpec> sources;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    sources.push_back({"source_" + format_index(i), false});
  }
  if (k >= 1) sources.push_back({"human", true});
  return SourceLadder(std::move(sources));
}

AnnotationRecord validate_record(const AnnotationRecord& record,
                                 const SourceLadder& ladder,
                                 double loss_bound) {
  const std::size_t k = ladder.size();
  const std::string where = "record '" + record.id + "': ";
  if (record.losses.size() != k || record.costs.size() != k) {
    throw Error("dimension_mismatch",
                where + "expected " + format_index(k) + " losses and costs, got " +
                    format_index(record.losses.size()) + " and " +
                    format_index(record.costs.size()));
  }
  if (!in_unit_interval(record.score)) {
    throw Error("score_range", where + "score must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double loss = record.losses[i];
    if (!(loss >= 0.0)) {
      throw Error("loss_range", where + "loss " + format_index(i) +
                                    " is negative or not a number");
    }
    if (loss > loss_bound) {
      throw Error("loss_bound", where + "loss " + format_index(i) +
                                    " exceeds the loss bound");
    }
  }
  if (record.losses.back() != 0.0) {
    throw Error("ground_truth_loss",
                where + "the ground-truth source must have zero loss");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(record.costs[i] > 0.0) || !std::isfinite(record.costs[i])) {
      throw Error("cost_range",
                  where + "cost " + format_index(i) + " must be positive");
    }
    if (i > 0 && record.costs[i] < record.costs[i - 1]) {
      throw Error("cost_order", where + "costs must be non-decreasing along "
                                        "the ladder (cost " +
                                    format_index(i) + " < cost " +
                                    format_index(i - 1) + ")");
    }
  }
  if (record.query_mask.has_value() && !record.query_prob.has_value()) {
    throw Error("query_prob",
                where + "a query mask requires a query probability");
  }
  if (record.query_prob.has_value()) {
    const double p = *record.query_prob;
    if (!(p > 0.0 && p <= 1.0)) {
      throw Error("query_prob", where + "query probability must lie in (0, 1]");
    }
  }
  return record;
}

ThresholdVector::ThresholdVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) {
    throw Error("thresholds", "threshold vector must not be empty");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!in_unit_interval(values_[i])) {
      throw Error("thresholds", "thresholds must lie in [0, 1]");
    }
    if (i > 0 && values_[i] < values_[i - 1]) {
      throw Error("thresholds", "thresholds must be non-decreasing");
    }
  }
}

ThresholdVector ThresholdVector::zeros(std::size_t num_thresholds) {
  return ThresholdVector(std::vector<double>(num_thresholds, 0.0));
}

ThresholdVector ThresholdVector::ones(std::size_t num_thresholds) {
  return ThresholdVector(std::vector<double>(num_thresholds, 1.0));
}

std::string to_string(UcbKind kind) {
  switch (kind) {
    case UcbKind::kClt:
      return "clt";
    case UcbKind::kHoeffding:
      return "hoeffding";
    case UcbKind::kBernstein:
      return "bernstein";
    case UcbKind::kBetting:
      return "betting";
  }
  return "unknown";
}

UcbKind parse_ucb_kind(const std::string& text) {
  if (text == "clt") return UcbKind::kClt;
  if (text == "hoeffding") return UcbKind::kHoeffding;
  if (text == "bernstein") return UcbKind::kBernstein;
  if (text == "betting") return UcbKind::kBetting;
  throw Error("ucb", "unknown UCB kind '" + text + "'");
}

GridSpec GridSpec::uniform(double step) {
  GridSpec spec;
  spec.mode = Mode::kUniform;
  spec.step = step;
  return spec;
}

GridSpec GridSpec::from_scores() { return GridSpec{}; }

GridSpec GridSpec::explicit_values(std::vector<double> values) {
  GridSpec spec;
  spec.mode = Mode::kExplicit;
  spec.values = std::move(values);
  return spec;
}

std::string to_string(const GridSpec& grid) {
  std::ostringstream out;
  out.precision(17);
  switch (grid.mode) {
    case GridSpec::Mode::kUniform:
      out << "uniform:" << grid.step;
      break;
    case GridSpec::Mode::kFromScores:
      out << "from-scores";
      break;
    case GridSpec::Mode::kExplicit:
      out << "values:";
      for (std::size_t i = 0; i < grid.values.size(); ++i) {
        if (i > 0) out << ',';
        out << grid.values[i];
      }
      break;
  }
  return out.str();
}

GridSpec parse_grid_spec(const std::string& text) {
  auto parse_number = [&](const std::string& token) {
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size()) {
      throw Error("grid", "malformed number '" + token + "' in grid spec");
    }
    return value;
  };
  if (text == "from-scores") return GridSpec::from_scores();
  if (text.rfind("uniform:", 0) == 0) {
    return GridSpec::uniform(parse_number(text.substr(8)));
  }
  if (text.rfind("values:", 0) == 0) {
    std::vector<double> values;
    std::stringstream list(text.substr(7));
    std::string token;
    while (std::getline(list, token, ',')) values.push_back(parse_number(token));
    return GridSpec::explicit_values(std::move(values));
  }
  throw Error("grid", "unknown grid spec '" + text + "'");
}

void CalibrationConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= loss_bound)) {
    throw Error("config", "epsilon must lie in [0, loss bound]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error("config", "alpha must lie in (0, 1)");
  }
  if (!(query_prob > 0.0 && query_prob <= 1.0)) {
    throw Error("config", "sampling probability must lie in (0, 1]");
  }
  if (!(loss_bound > 0.0) || !std::isfinite(loss_bound)) {
    throw Error("config", "loss bound must be positive");
  }
  if (betting.grid_points < 2) {
    throw Error("config", "betting grid needs at least 2 candidate means");
  }
  if (cell_budget == 0) throw Error("config", "cell budget must be positive");
}

}  // namespace annoroute
