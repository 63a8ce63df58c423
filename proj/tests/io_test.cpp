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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "annoroute/calibration.hpp"
#include "test_support.hpp"

namespace annoroute {
namespace {

namespace fs = std::filesystem;

const fs::path kFixtures = ANNOROUTE_FIXTURE_DIR;

fs::path scratch(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() / "annoroute_io_test" /
                       (std::string(info->test_suite_name()) + "." + info->name());
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string parse_error(const fs::path& path, std::string* code = nullptr) {
  try {
    parse_records(path, format_for_path(path), 1.0);
  } catch (const Error& e) {
    if (code) *code = e.code();
    return e.what();
  }
  return "";
}

TEST(ParseRecords, JsonLines) {
  const auto records = parse_records(kFixtures / "sample.jsonl",
                                     RecordFormat::kJsonLines, 1.0);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].id, "q1");
  EXPECT_FALSE(records[0].query_mask.has_value());
  EXPECT_EQ(records[1].query_mask, true);
  EXPECT_EQ(records[2].query_prob, 0.9);
  EXPECT_EQ(records[2].losses, (std::vector<double>{1, 1, 0}));
}

TEST(ParseRecords, CsvMatchesJsonLines) {
  EXPECT_EQ(format_for_path("x.csv"), RecordFormat::kCsv);
  EXPECT_EQ(parse_records(kFixtures / "sample.csv", RecordFormat::kCsv, 1.0),
            parse_records(kFixtures / "sample.jsonl", RecordFormat::kJsonLines, 1.0));
}

TEST(ParseRecords, WrongLossLengthNamesLine) {
  std::string code;
  const auto message = parse_error(kFixtures / "bad_dimension.jsonl", &code);
  EXPECT_EQ(code, "dimension_mismatch");
  EXPECT_NE(message.find(":2:"), std::string::npos) << message;
}

TEST(ParseRecords, MalformedLineKeepsFileLineNumber) {
  std::string code;
  const auto message = parse_error(kFixtures / "malformed.jsonl", &code);
  EXPECT_EQ(code, "parse");
  EXPECT_NE(message.find(":3:"), std::string::npos) << message;
}

TEST(ParseRecords, EmptyFile) {
  std::string code;
  const auto message = parse_error(kFixtures / "empty.jsonl", &code);
  EXPECT_EQ(code, "no_records");
  EXPECT_NE(message.find("no records"), std::string::npos);
}

TEST(ParseRecords, ExpectedSourcesAndMissingFile) {
  EXPECT_THROW(parse_records(kFixtures / "sample.jsonl", RecordFormat::kJsonLines,
                             1.0, 4),
               Error);
  EXPECT_THROW(parse_records(kFixtures / "missing.jsonl",
                             RecordFormat::kJsonLines, 1.0),
               Error);
}

TEST(ParseRecords, ValidationFailureNamesLine) {
  const auto path = scratch("bad.csv");
  std::ofstream(path) << "id,score,loss_0,loss_1,cost_0,cost_1\n"
                         "a,0.5,0,0,1,2\n"
                         "b,0.5,0,0,3,2\n";
  std::string code;
  const auto message = parse_error(path, &code);
  EXPECT_EQ(code, "cost_order");
  EXPECT_NE(message.find(":3:"), std::string::npos);
}

TEST(WriteRecords, RoundTripsBothFormats) {
  Rng rng(4);
  auto records = testing::random_records(rng, 30, 4, false);
  records[3].query_mask = false;
  records[3].query_prob = 0.3;
  records[5].score = 0.1 + 0.2;
  for (auto fmt : {RecordFormat::kJsonLines, RecordFormat::kCsv}) {
    const auto path = scratch(fmt == RecordFormat::kCsv ? "r.csv" : "r.jsonl");
    write_records(records, path, fmt);
    EXPECT_EQ(parse_records(path, fmt, 1.0), records);
  }
}

TEST(FormatNumber, SeventeenDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
  for (double v : {0.1 + 0.2, 1.0 / 3.0, 1e-300, 12345.678}) {
    EXPECT_EQ(std::strtod(format_number(v).c_str(), nullptr), v);
  }
}

TEST(ConfigJson, RoundTripAndHash) {
  CalibrationConfig c;
  c.epsilon = 0.07;
  c.ucb = UcbKind::kBetting;
  c.grid = GridSpec::uniform(0.05);
  c.seed = 0xfeedfacecafebeefULL;
  c.betting.lambda = BettingLambda::kRunningIndex;
  EXPECT_EQ(config_from_json(to_json(c)), c);
  EXPECT_EQ(config_hash(c).size(), 16u);
  EXPECT_EQ(config_hash(c), config_hash(config_from_json(to_json(c))));
  auto d = c;
  d.alpha = 0.1;
  EXPECT_NE(config_hash(c), config_hash(d));
  EXPECT_THROW(config_from_json(nlohmann::json{{"ucb", "nope"}}), Error);
}

TEST(ScenarioJson, RoundTrip) {
  for (const char* name : {"default_scenario.json", "adversarial_scenario.json",
                           "token_scenario.json"}) {
    const auto sc = scenario_from_json(read_json(kFixtures / name));
    EXPECT_EQ(scenario_from_json(to_json(sc)), sc) << name;
  }
  EXPECT_EQ(scenario_from_json(read_json(kFixtures / "default_scenario.json")),
            SyntheticScenario::default_for(3));
}

TEST(RunConfigJson, RoundTrip) {
  RunConfig run;
  run.method = Method::kCoannotating;
  run.ladder = SourceLadder({{"small", false}, {"large", false}, {"expert", true}});
  run.input = "cal.jsonl";
  const auto back = run_config_from_json(to_json(run));
  EXPECT_EQ(back.method, run.method);
  EXPECT_EQ(back.ladder, run.ladder);
  EXPECT_EQ(back.input, run.input);
  EXPECT_FALSE(back.output.has_value());
}

OutcomeFile sample_outcome(bool fallback) {
  Rng rng(6);
  const auto records = testing::random_records(rng, 40, 3, true, true);
  CalibrationConfig config;
  config.keep_surface = true;
  config.grid = GridSpec::uniform(0.25);
  config.epsilon = fallback ? 0.0 : 0.3;
  config.ucb = fallback ? UcbKind::kHoeffding : UcbKind::kClt;
  OutcomeFile file;
  file.config = config;
  file.ladder = SourceLadder::with_size(3);
  file.outcome = calibrate(records, file.ladder, config);
  return file;
}

TEST(OutcomeJson, ExactRoundTripThroughFile) {
  for (bool fallback : {false, true}) {
    const auto file = sample_outcome(fallback);
    EXPECT_EQ(file.outcome.fallback_used, fallback);
    const auto path = scratch("outcome.json");
    write_json(to_json(file), path);
    const auto json = read_json(path);
    EXPECT_EQ(outcome_from_json(json), file);
    EXPECT_EQ(json.at("fallback_used").get<bool>(), fallback);
    EXPECT_EQ(json.at("config_hash"), config_hash(file.config));
    EXPECT_EQ(json.at("seed"), file.config.seed);
  }
}

TEST(ReportJson, ExactRoundTripThroughFile) {
  CalibrationConfig config;
  config.grid = GridSpec::uniform(0.1);
  config.seed = 9;
  const auto report =
      pac_coverage_experiment(SyntheticScenario::default_for(3), config, 100);
  const auto path = scratch("report.json");
  write_json(to_json(report), path);
  EXPECT_EQ(report_from_json(read_json(path)), report);
  EXPECT_THROW(report_from_json(to_json(sample_outcome(false))), Error);
}

TEST(Csv, HeadersMatchDocumentedColumns) {
  const auto file = sample_outcome(false);
  const auto cells = scratch("cells.csv");
  write_cells_csv(file.outcome.cells, file.config, cells);
  EXPECT_EQ(first_line(cells),
            "threshold_tuple,risk_is,std_w,ucb,cost,config_hash,seed");

  CalibrationConfig config;
  config.grid = GridSpec::uniform(0.1);
  const auto report =
      pac_coverage_experiment(SyntheticScenario::default_for(3), config, 100);
  const auto trials = scratch("trials.csv");
  write_trials_csv(report, trials);
  EXPECT_EQ(first_line(trials),
            "trial,thresholds,true_risk,test_error,cost_savings,fallback,"
            "violation,config_hash,seed");
  const auto summary = scratch("summary.csv");
  write_summary_csv(std::vector{report}, summary);
  EXPECT_EQ(first_line(summary),
            "method,ucb,epsilon,alpha,trials,violations,violation_rate,"
            "mean_error,mean_true_risk,mean_cost_savings,config_hash,seed");
  EXPECT_NE(slurp(summary).find(config_hash(config)), std::string::npos);

  const auto records = parse_records(kFixtures / "sample.jsonl",
                                     RecordFormat::kJsonLines, 1.0);
  const auto decisions = deploy(file.outcome, records);
  const auto dec = scratch("decisions.csv");
  write_decisions_csv(records, decisions, file.ladder, file.config, dec);
  EXPECT_EQ(first_line(dec),
            "id,score,source_index,source_name,cost,loss,config_hash,seed");
}

TEST(Csv, CellRowsCarryFullPrecision) {
  const auto file = sample_outcome(false);
  const auto path = scratch("cells.csv");
  write_cells_csv(file.outcome.cells, file.config, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream s(line);
    std::string f;
    while (std::getline(s, f, ',')) fields.push_back(f);
    ASSERT_EQ(fields.size(), 7u);
    const auto& row = file.outcome.cells[rows];
    EXPECT_EQ(std::strtod(fields[3].c_str(), nullptr), row.ucb);
    ++rows;
  }
  EXPECT_EQ(rows, file.outcome.cells.size());
}

TEST(Io, UnwritablePath) {
  EXPECT_THROW(write_json(nlohmann::json::object(), "/nonexistent/dir/x.json"),
               Error);
}

}  // namespace
}  // namespace annoroute
