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

#include "annoroute/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace annoroute {
namespace {

using nlohmann::json;

std::string located(const std::filesystem::path& path, std::size_t line,
                    const std::string& message) {
  return path.string() + ":" + std::to_string(line) + ": " + message;
}

double number_or_nan(const json& value) {
  return value.is_null() ? std::numeric_limits<double>::quiet_NaN()
                         : value.get<double>();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, const std::string& column) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw Error("parse", "column '" + column + "' is not a number: '" + text + "'");
  }
  return value;
}

AnnotationRecord record_from_json(const json& j) {
  AnnotationRecord record;
  record.id = j.at("id").get<std::string>();
  record.score = j.at("score").get<double>();
  record.losses = j.at("losses").get<std::vector<double>>();
  record.costs = j.at("costs").get<std::vector<double>>();
  if (j.contains("z") && !j.at("z").is_null()) {
    const auto& z = j.at("z");
    record.query_mask = z.is_boolean() ? z.get<bool>() : z.get<int>() != 0;
  }
  if (j.contains("p") && !j.at("p").is_null()) {
    record.query_prob = j.at("p").get<double>();
  }
  return record;
}

json record_to_json(const AnnotationRecord& record) {
  json j;
  j["id"] = record.id;
  j["score"] = record.score;
  j["losses"] = record.losses;
  j["costs"] = record.costs;
  if (record.query_mask) j["z"] = *record.query_mask ? 1 : 0;
  if (record.query_prob) j["p"] = *record.query_prob;
  return j;
}

json ladder_to_json(const SourceLadder& ladder) {
  json sources = json::array();
  for (const auto& source : ladder.sources()) {
    sources.push_back({{"name", source.name},
                       {"ground_truth", source.is_ground_truth}});
  }
  return sources;
}

SourceLadder ladder_from_json(const json& j) {
  std::vector<SourceSpec> sources;
  for (const auto& source : j) {
    sources.push_back({source.at("name").get<std::string>(),
                       source.at("ground_truth").get<bool>()});
  }
  return SourceLadder(std::move(sources));
}

std::string join_thresholds(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ';';
    out += format_number(values[i]);
  }
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("io", "failed writing '" + path.string() + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

RecordFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? RecordFormat::kCsv
                                    : RecordFormat::kJsonLines;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::vector<AnnotationRecord> parse_records(
    const std::filesystem::path& path, RecordFormat format, double loss_bound,
    std::optional<std::size_t> expected_sources) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open '" + path.string() + "'");

  std::vector<AnnotationRecord> records;
  std::optional<SourceLadder> ladder;
  if (expected_sources) ladder = SourceLadder::with_size(*expected_sources);

  auto accept = [&](AnnotationRecord record, std::size_t line_no) {
    if (!ladder) {
      if (record.losses.size() < 2) {
        throw Error("dimension_mismatch",
                    located(path, line_no, "records need at least 2 sources"));
      }
      ladder = SourceLadder::with_size(record.losses.size());
    }
    try {
      records.push_back(validate_record(record, *ladder, loss_bound));
    } catch (const Error& e) {
      throw Error(e.code(), located(path, line_no, e.what()));
    }
  };

  std::string line;
  std::size_t line_no = 0;
  if (format == RecordFormat::kJsonLines) {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      AnnotationRecord record;
      try {
        record = record_from_json(json::parse(line));
      } catch (const json::exception& e) {
        throw Error("parse", located(path, line_no, e.what()));
      }
      accept(std::move(record), line_no);
    }
  } else {
    std::vector<std::string> header;
    std::map<std::string, std::size_t> column;
    std::size_t k = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      if (header.empty()) {
        header = fields;
        for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
        while (column.count("loss_" + std::to_string(k))) ++k;
        if (!column.count("id") || !column.count("score") || k < 2) {
          throw Error("parse", located(path, line_no,
                                       "header needs id, score, loss_0..loss_{K-1}"
                                       " and cost_0..cost_{K-1}"));
        }
        for (std::size_t s = 0; s < k; ++s) {
          if (!column.count("cost_" + std::to_string(s))) {
            throw Error("parse", located(path, line_no,
                                         "missing column cost_" + std::to_string(s)));
          }
        }
        continue;
      }
      if (fields.size() != header.size()) {
        throw Error("parse", located(path, line_no,
                                     "expected " + std::to_string(header.size()) +
                                         " fields, got " +
                                         std::to_string(fields.size())));
      }
      AnnotationRecord record;
      try {
        record.id = fields[column.at("id")];
        record.score = parse_double(fields[column.at("score")], "score");
        for (std::size_t s = 0; s < k; ++s) {
          const std::string loss = "loss_" + std::to_string(s);
          const std::string cost = "cost_" + std::to_string(s);
          record.losses.push_back(parse_double(fields[column.at(loss)], loss));
          record.costs.push_back(parse_double(fields[column.at(cost)], cost));
        }
        if (column.count("z") && !fields[column.at("z")].empty()) {
          record.query_mask = parse_double(fields[column.at("z")], "z") != 0.0;
        }
        if (column.count("p") && !fields[column.at("p")].empty()) {
          record.query_prob = parse_double(fields[column.at("p")], "p");
        }
      } catch (const Error& e) {
        throw Error(e.code(), located(path, line_no, e.what()));
      }
      accept(std::move(record), line_no);
    }
  }
  if (records.empty()) {
    throw Error("no_records", path.string() + ": no records");
  }
  return records;
}

void write_records(std::span<const AnnotationRecord> records,
                   const std::filesystem::path& path, RecordFormat format) {
  auto out = open_output(path);
  if (format == RecordFormat::kJsonLines) {
    for (const auto& record : records) out << record_to_json(record).dump() << '\n';
    finish(out, path);
    return;
  }
  const std::size_t k = records.empty() ? 0 : records.front().losses.size();
  out << "id,score";
  for (std::size_t s = 0; s < k; ++s) out << ",loss_" << s;
  for (std::size_t s = 0; s < k; ++s) out << ",cost_" << s;
  out << ",z,p\n";
  for (const auto& record : records) {
    out << record.id << ',' << format_number(record.score);
    for (double v : record.losses) out << ',' << format_number(v);
    for (double v : record.costs) out << ',' << format_number(v);
    out << ',';
    if (record.query_mask) out << (*record.query_mask ? 1 : 0);
    out << ',';
    if (record.query_prob) out << format_number(*record.query_prob);
    out << '\n';
  }
  finish(out, path);
}

json to_json(const CalibrationConfig& config) {
  return {
      {"epsilon", config.epsilon},
      {"alpha", config.alpha},
      {"query_prob", config.query_prob},
      {"loss_bound", config.loss_bound},
      {"grid", to_string(config.grid)},
      {"ucb", to_string(config.ucb)},
      {"seed", config.seed},
      {"cell_budget", config.cell_budget},
      {"betting_grid_points", config.betting.grid_points},
      {"betting_lambda", config.betting.lambda == BettingLambda::kTotalSamples
                             ? "total"
                             : "running"},
      {"keep_surface", config.keep_surface},
  };
}

CalibrationConfig config_from_json(const json& j) {
  CalibrationConfig config;
  try {
    config.epsilon = get_or(j, "epsilon", config.epsilon);
    config.alpha = get_or(j, "alpha", config.alpha);
    config.query_prob = get_or(j, "query_prob", config.query_prob);
    config.loss_bound = get_or(j, "loss_bound", config.loss_bound);
    if (j.contains("grid")) config.grid = parse_grid_spec(j.at("grid").get<std::string>());
    if (j.contains("ucb")) config.ucb = parse_ucb_kind(j.at("ucb").get<std::string>());
    config.seed = get_or<std::uint64_t>(j, "seed", config.seed);
    config.cell_budget = get_or<std::size_t>(j, "cell_budget", config.cell_budget);
    config.betting.grid_points =
        get_or<std::size_t>(j, "betting_grid_points", config.betting.grid_points);
    if (j.contains("betting_lambda")) {
      const auto lambda = j.at("betting_lambda").get<std::string>();
      if (lambda == "total") {
        config.betting.lambda = BettingLambda::kTotalSamples;
      } else if (lambda == "running") {
        config.betting.lambda = BettingLambda::kRunningIndex;
      } else {
        throw Error("config", "betting_lambda must be 'total' or 'running'");
      }
    }
    config.keep_surface = get_or(j, "keep_surface", config.keep_surface);
  } catch (const json::exception& e) {
    throw Error("config", e.what());
  }
  return config;
}

json to_json(const SyntheticScenario& scenario) {
  json score = {{"kind", scenario.score.kind == ScoreDistribution::Kind::kUniform
                             ? "uniform"
                             : "beta"}};
  if (scenario.score.kind == ScoreDistribution::Kind::kBeta) {
    score["a"] = scenario.score.a;
    score["b"] = scenario.score.b;
  }
  json losses = json::array();
  for (const auto& model : scenario.losses) {
    losses.push_back({{"floor", model.floor},
                      {"scale", model.scale},
                      {"power", model.power}});
  }
  const auto& c = scenario.cost;
  json cost;
  switch (c.kind) {
    case CostModel::Kind::kConstant:
      cost = {{"kind", "constant"}, {"values", c.base}};
      break;
    case CostModel::Kind::kLinear:
      cost = {{"kind", "linear"}, {"base", c.base}, {"slope", c.slope}};
      break;
    case CostModel::Kind::kApi:
      cost = {{"kind", "api"},
              {"price_in", c.price_in},
              {"price_out", c.price_out},
              {"tokens_in", c.tokens_in},
              {"tokens_out_base", c.tokens_out_base},
              {"tokens_out_slope", c.tokens_out_slope}};
      break;
  }
  return {{"sources", scenario.num_sources},
          {"score", score},
          {"loss", losses},
          {"cost", cost},
          {"n_cal", scenario.n_cal},
          {"n_test", scenario.n_test},
          {"seed", scenario.seed}};
}

SyntheticScenario scenario_from_json(const json& j) {
  SyntheticScenario scenario;
  try {
    scenario.num_sources = j.at("sources").get<std::size_t>();
    if (j.contains("score")) {
      const auto& score = j.at("score");
      const auto kind = score.at("kind").get<std::string>();
      if (kind == "uniform") {
        scenario.score.kind = ScoreDistribution::Kind::kUniform;
      } else if (kind == "beta") {
        scenario.score.kind = ScoreDistribution::Kind::kBeta;
        scenario.score.a = score.at("a").get<double>();
        scenario.score.b = score.at("b").get<double>();
      } else {
        throw Error("scenario", "unknown score distribution '" + kind + "'");
      }
    }
    for (const auto& model : j.at("loss")) {
      scenario.losses.push_back({get_or(model, "floor", 0.0),
                                 model.at("scale").get<double>(),
                                 get_or(model, "power", 1.0)});
    }
    const auto& cost = j.at("cost");
    const auto kind = cost.at("kind").get<std::string>();
    auto& c = scenario.cost;
    if (kind == "constant") {
      c.kind = CostModel::Kind::kConstant;
      c.base = cost.at("values").get<std::vector<double>>();
    } else if (kind == "linear") {
      c.kind = CostModel::Kind::kLinear;
      c.base = cost.at("base").get<std::vector<double>>();
      c.slope = cost.at("slope").get<std::vector<double>>();
    } else if (kind == "tokens") {
      std::vector<double> slope;
      if (cost.contains("tokens_out_slope")) {
        slope = cost.at("tokens_out_slope").get<std::vector<double>>();
      }
      const auto base = cost.at("tokens_out_base").get<std::vector<double>>();
      slope.resize(base.size(), 0.0);
      c = CostModel::tokens(base, slope);
    } else if (kind == "api") {
      c.kind = CostModel::Kind::kApi;
      c.price_in = cost.at("price_in").get<std::vector<double>>();
      c.price_out = cost.at("price_out").get<std::vector<double>>();
      c.tokens_in = cost.at("tokens_in").get<std::vector<double>>();
      c.tokens_out_base = cost.at("tokens_out_base").get<std::vector<double>>();
      c.tokens_out_slope = cost.contains("tokens_out_slope")
                               ? cost.at("tokens_out_slope").get<std::vector<double>>()
                               : std::vector<double>(c.price_in.size(), 0.0);
    } else {
      throw Error("scenario", "unknown cost kind '" + kind + "'");
    }
    scenario.n_cal = get_or<std::size_t>(j, "n_cal", scenario.n_cal);
    scenario.n_test = get_or<std::size_t>(j, "n_test", scenario.n_test);
    scenario.seed = get_or<std::uint64_t>(j, "seed", scenario.seed);
  } catch (const json::exception& e) {
    throw Error("scenario", e.what());
  }
  scenario.validate();
  return scenario;
}

namespace {

std::string provenance(const CalibrationConfig& config) {
  return "," + config_hash(config) + "," + std::to_string(config.seed);
}

}  // namespace

std::string config_hash(const CalibrationConfig& config) {
  const std::string canonical = to_json(config).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

json to_json(const RunConfig& run) {
  json j = {{"calibration", to_json(run.calibration)},
            {"method", to_string(run.method)}};
  if (run.ladder) j["ladder"] = ladder_to_json(*run.ladder);
  if (run.input) j["input"] = run.input->string();
  if (run.output) j["output"] = run.output->string();
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig run;
  try {
    if (j.contains("calibration")) run.calibration = config_from_json(j.at("calibration"));
    if (j.contains("method")) run.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("ladder")) run.ladder = ladder_from_json(j.at("ladder"));
    if (j.contains("input")) run.input = j.at("input").get<std::string>();
    if (j.contains("output")) run.output = j.at("output").get<std::string>();
  } catch (const json::exception& e) {
    throw Error("config", e.what());
  }
  return run;
}

json to_json(const OutcomeFile& file) {
  const auto& o = file.outcome;
  json cells = json::array();
  for (const auto& row : o.cells) {
    cells.push_back({{"thresholds", row.thresholds},
                     {"risk_is", row.risk_is},
                     {"std_w", row.std_w},
                     {"ucb", row.ucb},
                     {"cost", row.cost}});
  }
  const auto u = o.thresholds.values();
  return {{"kind", "calibration_outcome"},
          {"method", to_string(file.method)},
          {"config", to_json(file.config)},
          {"config_hash", config_hash(file.config)},
          {"seed", file.config.seed},
          {"ladder", ladder_to_json(file.ladder)},
          {"thresholds", std::vector<double>(u.begin(), u.end())},
          {"feasible_count", o.feasible_count},
          {"ucb_at_selection", o.ucb_at_selection},
          {"empirical_cost", o.empirical_cost},
          {"fallback_used", o.fallback_used},
          {"queried_count", o.queried_count},
          {"calibration_size", o.calibration_size},
          {"cells", cells}};
}

OutcomeFile outcome_from_json(const json& j) {
  OutcomeFile file;
  try {
    if (j.value("kind", "") != "calibration_outcome") {
      throw Error("parse", "not a calibration outcome");
    }
    file.method = parse_method(j.at("method").get<std::string>());
    file.config = config_from_json(j.at("config"));
    file.ladder = ladder_from_json(j.at("ladder"));
    auto& o = file.outcome;
    o.thresholds = ThresholdVector(j.at("thresholds").get<std::vector<double>>());
    o.feasible_count = j.at("feasible_count").get<std::size_t>();
    o.ucb_at_selection = number_or_nan(j.at("ucb_at_selection"));
    o.empirical_cost = number_or_nan(j.at("empirical_cost"));
    o.fallback_used = j.at("fallback_used").get<bool>();
    o.queried_count = j.at("queried_count").get<std::size_t>();
    o.calibration_size = j.at("calibration_size").get<std::size_t>();
    for (const auto& cell : j.at("cells")) {
      o.cells.push_back({cell.at("thresholds").get<std::vector<double>>(),
                         number_or_nan(cell.at("risk_is")),
                         number_or_nan(cell.at("std_w")),
                         number_or_nan(cell.at("ucb")),
                         number_or_nan(cell.at("cost"))});
    }
  } catch (const json::exception& e) {
    throw Error("parse", e.what());
  }
  if (file.outcome.thresholds.num_sources() != file.ladder.size()) {
    throw Error("parse", "outcome thresholds do not match its ladder");
  }
  return file;
}

json to_json(const CoverageReport& report) {
  json trials = json::array();
  for (const auto& t : report.per_trial) {
    trials.push_back({{"trial", t.trial},
                      {"thresholds", t.thresholds},
                      {"true_risk", t.true_risk},
                      {"test_error", t.test_error},
                      {"cost_savings", t.cost_savings},
                      {"fallback", t.fallback},
                      {"violation", t.violation}});
  }
  return {{"kind", "coverage_report"},
          {"method", to_string(report.method)},
          {"config", to_json(report.config)},
          {"config_hash", config_hash(report.config)},
          {"seed", report.config.seed},
          {"scenario", to_json(report.scenario)},
          {"trials", report.trials},
          {"violations", report.violations},
          {"violation_rate", report.violation_rate},
          {"mean_cost_savings", report.mean_cost_savings},
          {"mean_error", report.mean_error},
          {"mean_true_risk", report.mean_true_risk},
          {"per_trial", trials}};
}

CoverageReport report_from_json(const json& j) {
  CoverageReport report;
  try {
    if (j.value("kind", "") != "coverage_report") {
      throw Error("parse", "not a coverage report");
    }
    report.method = parse_method(j.at("method").get<std::string>());
    report.config = config_from_json(j.at("config"));
    report.scenario = scenario_from_json(j.at("scenario"));
    report.trials = j.at("trials").get<std::size_t>();
    report.violations = j.at("violations").get<std::size_t>();
    report.violation_rate = j.at("violation_rate").get<double>();
    report.mean_cost_savings = j.at("mean_cost_savings").get<double>();
    report.mean_error = j.at("mean_error").get<double>();
    report.mean_true_risk = j.at("mean_true_risk").get<double>();
    for (const auto& t : j.at("per_trial")) {
      report.per_trial.push_back({t.at("trial").get<std::size_t>(),
                                  t.at("thresholds").get<std::vector<double>>(),
                                  t.at("true_risk").get<double>(),
                                  t.at("test_error").get<double>(),
                                  t.at("cost_savings").get<double>(),
                                  t.at("fallback").get<bool>(),
                                  t.at("violation").get<bool>()});
    }
  } catch (const json::exception& e) {
    throw Error("parse", e.what());
  }
  return report;
}

void write_json(const json& j, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("parse", path.string() + ": " + e.what());
  }
}

void write_cells_csv(std::span<const SurfaceRow> cells,
                     const CalibrationConfig& config,
                     const std::filesystem::path& path) {
  const std::string stamp = provenance(config);
  auto out = open_output(path);
  out << kCellCsvHeader << '\n';
  for (const auto& row : cells) {
    out << join_thresholds(row.thresholds) << ',' << format_number(row.risk_is)
        << ',' << format_number(row.std_w) << ',' << format_number(row.ucb)
        << ',' << format_number(row.cost) << stamp << '\n';
  }
  finish(out, path);
}

void write_trials_csv(const CoverageReport& report,
                      const std::filesystem::path& path) {
  const std::string stamp = provenance(report.config);
  auto out = open_output(path);
  out << kTrialCsvHeader << '\n';
  for (const auto& t : report.per_trial) {
    out << t.trial << ',' << join_thresholds(t.thresholds) << ','
        << format_number(t.true_risk) << ',' << format_number(t.test_error)
        << ',' << format_number(t.cost_savings) << ',' << (t.fallback ? 1 : 0)
        << ',' << (t.violation ? 1 : 0) << stamp << '\n';
  }
  finish(out, path);
}

void write_summary_csv(std::span<const CoverageReport> reports,
                       const std::filesystem::path& path) {
  auto out = open_output(path);
  out << kSummaryCsvHeader << '\n';
  for (const auto& r : reports) {
    out << to_string(r.method) << ',' << to_string(r.config.ucb) << ','
        << format_number(r.config.epsilon) << ','
        << format_number(r.config.alpha) << ',' << r.trials << ','
        << r.violations << ',' << format_number(r.violation_rate) << ','
        << format_number(r.mean_error) << ','
        << format_number(r.mean_true_risk) << ','
        << format_number(r.mean_cost_savings) << ',' << config_hash(r.config)
        << ',' << r.config.seed << '\n';
  }
  finish(out, path);
}

void write_decisions_csv(std::span<const AnnotationRecord> records,
                         std::span<const RoutingDecision> decisions,
                         const SourceLadder& ladder,
                         const CalibrationConfig& config,
                         const std::filesystem::path& path) {
  const std::string stamp = provenance(config);
  auto out = open_output(path);
  out << kDecisionCsvHeader << '\n';
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    out << records[i].id << ',' << format_number(records[i].score) << ','
        << d.source_index << ',' << ladder[d.source_index].name << ','
        << format_number(d.cost) << ',' << format_number(d.loss) << stamp
        << '\n';
  }
  finish(out, path);
}

}  // namespace annoroute
