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

#include "annoroute/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "annoroute/baselines.hpp"
#include "annoroute/calibration.hpp"
#include "annoroute/estimation.hpp"
#include "annoroute/harness.hpp"
#include "annoroute/io.hpp"
#include "annoroute/routing.hpp"

namespace annoroute {
namespace {

namespace fs = std::filesystem;

// Flags shared by calibrate and validate. Unset flags leave the value from
// --config (or the defaults) alone.
struct CalibrationFlags {
  std::optional<double> epsilon;
  std::optional<double> alpha;
  std::optional<double> p_sample;
  std::optional<std::string> ucb;
  std::optional<std::string> grid;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::optional<double> loss_bound;
  std::optional<std::size_t> cell_budget;
  std::optional<std::string> betting_lambda;
  std::optional<std::string> config;

  void attach(CLI::App& app) {
    app.add_option("--epsilon", epsilon, "Target risk level");
    app.add_option("--alpha", alpha, "Failure probability");
    app.add_option("--p-sample", p_sample, "Ground-truth query probability");
    app.add_option("--ucb", ucb, "clt | hoeffding | bernstein | betting");
    app.add_option("--grid", grid, "uniform:STEP | from-scores | file:PATH");
    app.add_option("--method", method, "hypac | pac-labeling | coannotating");
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--loss-bound", loss_bound, "Upper bound B on losses");
    app.add_option("--cell-budget", cell_budget, "Maximum threshold cells");
    app.add_option("--betting-lambda", betting_lambda, "total | running");
    app.add_option("--config", config, "Run configuration JSON");
  }
};

GridSpec grid_from_flag(const std::string& text) {
  if (text.rfind("file:", 0) != 0) return parse_grid_spec(text);
  const fs::path path = text.substr(5);
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open grid file '" + path.string() + "'");
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    std::replace(token.begin(), token.end(), ',', ' ');
    std::istringstream parts(token);
    std::string part;
    while (parts >> part) {
      char* end = nullptr;
      const double value = std::strtod(part.c_str(), &end);
      if (end != part.c_str() + part.size()) {
        throw Error("grid", "malformed number '" + part + "' in " + path.string());
      }
      values.push_back(value);
    }
  }
  return GridSpec::explicit_values(std::move(values));
}

RunConfig resolve(const CalibrationFlags& flags) {
  RunConfig run;
  if (flags.config) run = run_config_from_json(read_json(*flags.config));
  auto& c = run.calibration;
  if (flags.epsilon) c.epsilon = *flags.epsilon;
  if (flags.alpha) c.alpha = *flags.alpha;
  if (flags.p_sample) c.query_prob = *flags.p_sample;
  if (flags.ucb) c.ucb = parse_ucb_kind(*flags.ucb);
  if (flags.grid) c.grid = grid_from_flag(*flags.grid);
  if (flags.method) run.method = parse_method(*flags.method);
  if (flags.seed) c.seed = *flags.seed;
  if (flags.loss_bound) c.loss_bound = *flags.loss_bound;
  if (flags.cell_budget) c.cell_budget = *flags.cell_budget;
  if (flags.betting_lambda) {
    if (*flags.betting_lambda == "total") {
      c.betting.lambda = BettingLambda::kTotalSamples;
    } else if (*flags.betting_lambda == "running") {
      c.betting.lambda = BettingLambda::kRunningIndex;
    } else {
      throw Error("config", "--betting-lambda must be 'total' or 'running'");
    }
  }
  c.validate();
  return run;
}

void check_method_sources(Method method, std::size_t k) {
  if (method == Method::kCoannotating && k != 3) {
    throw Error("method_combination",
                "coannotating needs exactly 3 sources, got " + std::to_string(k));
  }
  if (method == Method::kPacLabeling && k != 2) {
    throw Error("method_combination",
                "pac-labeling needs exactly 2 sources, got " + std::to_string(k));
  }
}

fs::path require_path(const std::optional<fs::path>& flag,
                      const std::optional<fs::path>& from_config,
                      const char* name) {
  if (flag) return *flag;
  if (from_config) return *from_config;
  throw Error("usage", std::string("missing ") + name);
}

std::string fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

struct Calibrate {
  CalibrationFlags flags;
  std::optional<fs::path> input;
  std::optional<fs::path> output;
  std::optional<fs::path> cells;
  std::optional<std::size_t> sources;

  void attach(CLI::App& app) {
    flags.attach(app);
    app.add_option("--input,-i", input, "Calibration records (.jsonl or .csv)");
    app.add_option("--output,-o", output, "Outcome JSON");
    app.add_option("--cells", cells, "Per-cell UCB table CSV");
    app.add_option("--sources", sources, "Expected number of sources K");
  }

  int run(std::ostream& out) const {
    const RunConfig cfg = resolve(flags);
    const fs::path in_path = require_path(input, cfg.input, "--input");
    const fs::path out_path = require_path(output, cfg.output, "--output");

    std::optional<std::size_t> k = sources;
    if (!k && cfg.ladder) k = cfg.ladder->size();
    const auto records = parse_records(in_path, format_for_path(in_path),
                                       cfg.calibration.loss_bound, k);
    const SourceLadder ladder =
        cfg.ladder ? *cfg.ladder
                   : SourceLadder::with_size(records.front().num_sources());
    if (sources && *sources != ladder.size()) {
      throw Error("dimension_mismatch", "--sources disagrees with the ladder");
    }
    check_method_sources(cfg.method, ladder.size());

    OutcomeFile file;
    file.method = cfg.method;
    file.config = cfg.calibration;
    file.ladder = ladder;
    CalibrationConfig run_config = cfg.calibration;
    run_config.keep_surface = run_config.keep_surface || cells.has_value();
    file.outcome = run_method(cfg.method, records, ladder, run_config);
    if (cells) write_cells_csv(file.outcome.cells, file.config, *cells);
    if (!cfg.calibration.keep_surface) file.outcome.cells.clear();
    write_json(to_json(file), out_path);

    const auto u = file.outcome.thresholds.values();
    out << "thresholds";
    for (double v : u) out << ' ' << format_number(v);
    out << "\nfeasible_cells " << file.outcome.feasible_count
        << "\nucb_at_selection " << format_number(file.outcome.ucb_at_selection)
        << "\nempirical_cost " << format_number(file.outcome.empirical_cost)
        << "\nfallback_used " << (file.outcome.fallback_used ? "true" : "false")
        << "\nqueried " << file.outcome.queried_count << " of "
        << file.outcome.calibration_size << '\n';
    return kExitOk;
  }
};

struct Route {
  fs::path outcome;
  fs::path input;
  std::optional<fs::path> output;

  void attach(CLI::App& app) {
    app.add_option("--outcome", outcome, "Outcome JSON from calibrate")->required();
    app.add_option("--input,-i", input, "Records to route")->required();
    app.add_option("--output,-o", output, "Decisions CSV");
  }

  int run(std::ostream& out) const {
    const OutcomeFile file = outcome_from_json(read_json(outcome));
    const auto records = parse_records(input, format_for_path(input),
                                       file.config.loss_bound, file.ladder.size());
    const auto decisions = deploy(file.outcome, records);
    if (output) {
      write_decisions_csv(records, decisions, file.ladder, file.config, *output);
    }
    std::vector<std::size_t> counts(file.ladder.size(), 0);
    for (const auto& d : decisions) ++counts[d.source_index];
    const auto& u = file.outcome.thresholds;
    out << "records " << records.size() << "\nerror "
        << format_number(empirical_risk(u, records)) << "\ncost "
        << format_number(empirical_cost(u, records)) << "\nsavings_percent "
        << format_number(cost_savings(u, records)) << '\n';
    for (std::size_t k = 0; k < counts.size(); ++k) {
      out << "routed " << file.ladder[k].name << ' ' << counts[k] << '\n';
    }
    out << "config_hash " << config_hash(file.config) << "\nseed "
        << file.config.seed << '\n';
    return kExitOk;
  }
};

SyntheticScenario load_scenario(const std::optional<fs::path>& path,
                                std::size_t sources) {
  if (path) return scenario_from_json(read_json(*path));
  return SyntheticScenario::default_for(sources);
}

struct Validate {
  CalibrationFlags flags;
  std::optional<fs::path> scenario;
  std::size_t sources = 3;
  std::size_t trials = 1000;
  std::optional<std::size_t> n_cal;
  std::optional<fs::path> output;
  std::optional<fs::path> trials_csv;

  void attach(CLI::App& app) {
    flags.attach(app);
    app.add_option("--scenario", scenario, "Scenario JSON");
    app.add_option("--sources", sources, "K for the built-in scenario")
        ->capture_default_str();
    app.add_option("--trials", trials, "Number of repetitions")
        ->capture_default_str();
    app.add_option("--n-cal", n_cal, "Override the calibration size");
    app.add_option("--output,-o", output, "CoverageReport JSON");
    app.add_option("--trials-csv", trials_csv, "Per-trial CSV");
  }

  int run(std::ostream& out) const {
    const RunConfig cfg = resolve(flags);
    SyntheticScenario sc = load_scenario(scenario, sources);
    if (n_cal) sc.n_cal = *n_cal;
    sc.validate();
    // pac-labeling runs on the cheapest source plus ground truth at any K.
    if (cfg.method == Method::kCoannotating) {
      check_method_sources(cfg.method, sc.num_sources);
    }
    const CoverageReport report =
        pac_coverage_experiment(sc, cfg.calibration, trials, cfg.method);
    if (output) write_json(to_json(report), *output);
    if (trials_csv) write_trials_csv(report, *trials_csv);
    out << "trials " << report.trials << "\nviolations " << report.violations
        << "\nviolation_rate " << format_number(report.violation_rate)
        << "\nmean_true_risk " << format_number(report.mean_true_risk)
        << "\nmean_error " << format_number(report.mean_error)
        << "\nmean_cost_savings " << format_number(report.mean_cost_savings)
        << "\nconfig_hash " << config_hash(report.config) << "\nseed "
        << report.config.seed << '\n';
    return kExitOk;
  }
};

struct Simulate {
  std::optional<fs::path> scenario;
  std::size_t sources = 3;
  fs::path output_dir;
  std::string format = "jsonl";
  std::optional<std::size_t> n_cal;
  std::optional<std::size_t> n_test;
  std::optional<std::uint64_t> seed;
  std::optional<double> mask_prob;

  void attach(CLI::App& app) {
    app.add_option("--scenario", scenario, "Scenario JSON");
    app.add_option("--sources", sources, "K for the built-in scenario")
        ->capture_default_str();
    app.add_option("--output-dir,-o", output_dir, "Directory for record files")
        ->required();
    app.add_option("--format", format, "jsonl | csv")
        ->check(CLI::IsMember({"jsonl", "csv"}))
        ->capture_default_str();
    app.add_option("--n-cal", n_cal, "Calibration records");
    app.add_option("--n-test", n_test, "Test records");
    app.add_option("--seed", seed, "Scenario seed");
    app.add_option("--p-sample", mask_prob,
                   "Also draw ground-truth query masks with this probability");
  }

  int run(std::ostream& out) const {
    SyntheticScenario sc = load_scenario(scenario, sources);
    if (n_cal) sc.n_cal = *n_cal;
    if (n_test) sc.n_test = *n_test;
    if (seed) sc.seed = *seed;
    sc.validate();
    GeneratedData data = generate(sc);
    if (mask_prob) {
      if (!(*mask_prob > 0.0 && *mask_prob <= 1.0)) {
        throw Error("config", "--p-sample must lie in (0, 1]");
      }
      const auto masked = apply_query_mask(data.calibration, *mask_prob,
                                           derive_seed(sc.seed, 0, 3));
      data.calibration.assign(masked.records().begin(), masked.records().end());
    }
    fs::create_directories(output_dir);
    const auto fmt = format == "csv" ? RecordFormat::kCsv : RecordFormat::kJsonLines;
    const std::string ext = format == "csv" ? ".csv" : ".jsonl";
    const fs::path cal = output_dir / ("calibration" + ext);
    const fs::path test = output_dir / ("test" + ext);
    write_records(data.calibration, cal, fmt);
    write_records(data.test, test, fmt);
    nlohmann::json manifest = {{"scenario", to_json(sc)},
                               {"seed", sc.seed},
                               {"calibration", cal.filename().string()},
                               {"test", test.filename().string()}};
    if (mask_prob) manifest["p_sample"] = *mask_prob;
    write_json(manifest, output_dir / "manifest.json");
    out << "calibration " << cal.string() << ' ' << data.calibration.size()
        << "\ntest " << test.string() << ' ' << data.test.size() << '\n';
    return kExitOk;
  }
};

struct Report {
  std::vector<fs::path> inputs;
  std::optional<fs::path> summary;
  std::optional<fs::path> trials_dir;

  void attach(CLI::App& app) {
    app.add_option("reports", inputs, "CoverageReport JSON files")->required();
    app.add_option("--summary", summary, "Summary CSV, one row per report");
    app.add_option("--trials-dir", trials_dir, "Directory for per-trial CSVs");
  }

  int run(std::ostream& out) const {
    std::vector<CoverageReport> reports;
    for (const auto& path : inputs) reports.push_back(report_from_json(read_json(path)));

    char line[256];
    std::snprintf(line, sizeof(line), "%-14s %-10s %8s %8s %7s %10s %10s %10s %10s\n",
                  "method", "ucb", "epsilon", "alpha", "trials", "viol_rate",
                  "mean_err", "true_risk", "savings%");
    out << line;
    for (const auto& r : reports) {
      std::snprintf(line, sizeof(line),
                    "%-14s %-10s %8s %8s %7zu %10s %10s %10s %10s\n",
                    to_string(r.method).c_str(), to_string(r.config.ucb).c_str(),
                    fixed(r.config.epsilon, 4).c_str(),
                    fixed(r.config.alpha, 4).c_str(), r.trials,
                    fixed(r.violation_rate, 4).c_str(),
                    fixed(r.mean_error, 4).c_str(),
                    fixed(r.mean_true_risk, 4).c_str(),
                    fixed(r.mean_cost_savings, 2).c_str());
      out << line;
    }
    if (summary) write_summary_csv(reports, *summary);
    if (trials_dir) {
      fs::create_directories(*trials_dir);
      for (const auto& r : reports) {
        const std::string name = "trials_" + to_string(r.method) + "_" +
                                 to_string(r.config.ucb) + "_" +
                                 config_hash(r.config) + ".csv";
        write_trials_csv(r, *trials_dir / name);
      }
    }
    return kExitOk;
  }
};

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Cost-aware routing of annotations across a ladder of sources"};
  app.name(args.empty() ? "annoroute" : args.front());
  app.require_subcommand(1);

  Calibrate calibrate;
  Route route;
  Validate validate;
  Simulate simulate;
  Report report;
  CLI::App* calibrate_cmd =
      app.add_subcommand("calibrate", "Select thresholds from calibration records");
  CLI::App* route_cmd = app.add_subcommand("route", "Route records with an outcome");
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Repeated-trial coverage on a scenario");
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Generate synthetic record files");
  CLI::App* report_cmd = app.add_subcommand("report", "Tabulate coverage reports");
  calibrate.attach(*calibrate_cmd);
  route.attach(*route_cmd);
  validate.attach(*validate_cmd);
  simulate.attach(*simulate_cmd);
  report.attach(*report_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << '\n';
    return kExitUsageError;
  }

  try {
    if (*calibrate_cmd) return calibrate.run(out);
    if (*route_cmd) return route.run(out);
    if (*validate_cmd) return validate.run(out);
    if (*simulate_cmd) return simulate.run(out);
    return report.run(out);
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << one_line(e.what()) << '\n';
    return e.code() == "usage" || e.code() == "method_combination"
               ? kExitUsageError
               : kExitRuntimeError;
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << '\n';
    return kExitRuntimeError;
  }
}

int run_cli(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace annoroute
