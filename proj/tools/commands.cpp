// Copyright 2026 The feesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "CLI11.hpp"
#include "feesim/agents.hpp"
#include "feesim/errors.hpp"
#include "feesim/experiment.hpp"
#include "feesim/game.hpp"
#include "feesim/metrics.hpp"
#include "feesim/orchestrator.hpp"
#include "feesim/plot_export.hpp"
#include "feesim/regression.hpp"
#include "feesim/runlog_io.hpp"
#include "feesim/trajectory.hpp"
#include "json.hpp"

namespace feesim::cli {

namespace fs = std::filesystem;

namespace {

// Raised for flag values that parse but make no sense; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double parse_number(const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || !std::isfinite(v)) {
    throw InvalidArgument(fmt::format("'{}' is not a finite number", token));
  }
  return v;
}

std::vector<int> parse_int_list(const std::string& text, std::string_view what) {
  std::vector<int> out;
  for (const auto& t : split_tokens(text)) {
    const double v = parse_number(t);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
      throw UsageError(fmt::format("{}: '{}' is not an integer", what, t));
    }
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw UsageError(fmt::format("{}: empty list", what));
  return out;
}

std::string strip_comments(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    out += line.substr(0, line.find('#'));
    out += '\n';
  }
  return out;
}

GameSpec game_from_flags(double beta, const std::string& types, const std::string& types_file,
                         int population) {
  if (!types.empty() && !types_file.empty()) {
    throw UsageError("--types and --types-file are mutually exclusive");
  }
  std::vector<double> values;
  try {
    if (!types_file.empty()) {
      values = parse_types(strip_comments(read_text(types_file)));
    } else if (!types.empty()) {
      values = parse_types(types);
    }
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (values.empty()) {
    if (population < 1) throw UsageError("--population must be >= 1");
    return GameSpec::integer_grid(population, beta);
  }
  return GameSpec(std::move(values), beta);
}

std::string join_prices(const std::vector<Price>& prices) {
  std::vector<std::string> parts;
  for (Price p : prices) parts.push_back(fmt::format("{:.2f}", p.value()));
  return fmt::format("{}", fmt::join(parts, " "));
}

std::vector<fs::path> collect_logs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& input : inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else {
      throw UsageError(fmt::format("{} does not exist", input));
    }
  }
  if (out.empty()) throw UsageError("no run logs (*.jsonl) found");
  return out;
}

void sort_canonical(std::vector<RunLog>& logs) {
  std::stable_sort(logs.begin(), logs.end(),
                   [](const RunLog& a, const RunLog& b) { return cell_less(a.cell, b.cell); });
}

std::vector<RunLog> load_ok_logs(const std::vector<fs::path>& paths, std::ostream& err) {
  std::vector<RunLog> logs;
  for (const auto& p : paths) {
    RunLog log = load_runlog(p);
    if (!log.ok()) {
      err << fmt::format("warning: skipping failed run {} ({})\n", p.string(), *log.failure);
      continue;
    }
    logs.push_back(std::move(log));
  }
  if (logs.empty()) throw Error("no completed run logs to analyse");
  sort_canonical(logs);
  return logs;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

void write_rows_and_metrics(const fs::path& dir, const std::vector<DeviationRow>& rows,
                            const std::vector<CellMetrics>& cells) {
  fs::create_directories(dir);
  write_file_atomic(dir / "rows.csv", render([&](std::ostream& s) { write_deviation_csv(s, rows); }));
  write_file_atomic(dir / "metrics.csv",
                    render([&](std::ostream& s) { write_cell_metrics_csv(s, cells); }));
}

ExperimentConfig load_config(const std::string& path, const std::string& profile) {
  if (!path.empty()) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError({fmt::format("{}: invalid JSON: {}", path, e.what())});
    }
    return ExperimentConfig::from_json(doc);
  }
  if (profile == "paper") return paper_profile();
  if (profile == "extended") return extended_profile();
  throw UsageError(fmt::format("unknown profile '{}' (expected paper or extended)", profile));
}

AgentKind default_agent(const std::string& label) {
  if (label == "rational") return RationalParams{};
  if (label == "heuristic") return HeuristicParams{};
  if (label == "gateway") return GatewayConfig{};
  throw UsageError(fmt::format("unknown agent '{}'", label));
}

// ---- commands --------------------------------------------------------------

struct SolveArgs {
  double beta = 0.0;
  double price = 0.0;
  std::string types;
  std::string types_file;
  int population = 50;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const GameSpec spec = game_from_flags(a.beta, a.types, a.types_file, a.population);
  Price price;
  try {
    price = Price(a.price);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const EquilibriumSolution sol = solve_fee(spec, price);
  std::vector<std::string> attendees;
  for (double t : spec.types()) {
    if (best_response(t, spec.beta(), sol.selected, price) == Action::kAttend) {
      attendees.push_back(format_double(t));
    }
  }
  out << fmt::format("beta: {}\n", format_double(spec.beta()));
  out << fmt::format("price: {}\n", format_double(price.value()));
  out << fmt::format("population: {}\n", spec.population());
  out << fmt::format("fixed points: {}\n", fmt::join(sol.fixed_points, " "));
  out << fmt::format("selected: {}\n", sol.selected);
  out << fmt::format("attendees: {}\n", attendees.empty() ? "(none)" : fmt::format("{}", fmt::join(attendees, " ")));
  return kExitOk;
}

struct PricesArgs {
  double beta = 0.0;
  std::string kind = "all";
  std::string targets = "0,10,20,30,40,50";
  std::string types;
  std::string types_file;
  int population = 50;
  double offset = kDefaultPriceOffset;
};

int cmd_prices(const PricesArgs& a, std::ostream& out) {
  const GameSpec spec = game_from_flags(a.beta, a.types, a.types_file, a.population);
  const std::vector<int> targets = parse_int_list(a.targets, "--targets");
  std::vector<TrajectoryKind> kinds;
  if (a.kind == "all") {
    kinds.assign(kAllTrajectoryKinds.begin(), kAllTrajectoryKinds.end());
  } else {
    kinds.push_back(parse_trajectory_kind(a.kind));
  }
  for (TrajectoryKind kind : kinds) {
    const PriceSequence seq = build_trajectory(spec, kind, targets, a.offset);
    out << fmt::format("kind: {}\n", to_string(kind));
    out << fmt::format("prices: {}\n", join_prices(seq.prices));
    out << fmt::format("targets: {}\n", fmt::join(seq.target_counts, " "));
  }
  return kExitOk;
}

struct RunArgs {
  std::string config;
  std::string profile = "paper";
  std::string agent;
  std::string out;
  int threads = 0;
  bool serial = false;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = load_config(a.config, a.profile);
  if (!a.agent.empty() && a.agent != agent_label(cfg.agent)) cfg.agent = default_agent(a.agent);
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.threads > 0) cfg.threads = a.threads;

  FactorialOptions options;
  options.execution = a.serial ? Execution::kSerial : Execution::kParallel;
  options.threads = cfg.threads;
  if (const auto* g = std::get_if<GatewayConfig>(&cfg.agent)) options.round.max_in_flight = g->max_in_flight;

  const FactorialResult result = run_factorial(cfg, options);

  const fs::path dir(cfg.output_dir);
  const fs::path log_dir = dir / "logs";
  fs::create_directories(log_dir);
  for (const auto& log : result.logs) {
    write_file_atomic(log_dir / runlog_file_name(log.cell), runlog_to_string(log));
  }
  for (const auto& f : result.failures) {
    write_file_atomic(log_dir / runlog_file_name(f.partial.cell), runlog_to_string(f.partial));
    err << fmt::format("cell {} failed: {}\n", f.key, f.message);
  }
  write_file_atomic(dir / "config.json", cfg.to_json().dump(2) + "\n");

  const std::size_t total = result.logs.size() + result.failures.size();
  out << fmt::format("cells: {} ({} ok, {} failed)\n", total, result.logs.size(), result.failures.size());
  if (!result.logs.empty()) {
    const auto rows = build_deviation_rows(result.logs);
    const auto cells = cell_metrics(rows);
    write_rows_and_metrics(dir, rows, cells);
    out << fmt::format("rows: {}\n", rows.size());
    out << fmt::format("overall RMSE: {}\n", format_double(rmse(rows)));
    out << format_cell_table(cells);
  }
  out << fmt::format("output: {}\n", dir.string());
  return result.failures.empty() ? kExitOk : kExitRuntime;
}

struct ReplayArgs {
  std::vector<std::string> logs;
  std::string out;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<RunLog> originals;
  for (const auto& path : collect_logs(a.logs)) {
    RunLog log = load_runlog(path);
    if (!log.ok()) {
      throw Error(fmt::format("{}: cannot replay a failed run ({})", path.string(), *log.failure));
    }
    originals.push_back(std::move(log));
  }
  sort_canonical(originals);
  std::vector<RunLog> replayed;
  for (const RunLog& original : originals) {
    ExperimentCell cell = original.cell;
    cell.agent = ReplaySource{replay_table(original)};
    const GameSpec spec = original.spec();
    const auto agents = make_agents(cell.agent, spec, cell.seed);
    RunLog again = run_cell(cell, spec, agents);
    again.cell.agent = original.cell.agent;
    if (again.rounds != original.rounds || again.traces != original.traces) {
      err << fmt::format("{}: replay differs from the recorded run\n", original.cell.key());
      return kExitRuntime;
    }
    replayed.push_back(std::move(again));
  }
  const auto rows = build_deviation_rows(replayed);
  if (rows != build_deviation_rows(originals)) {
    err << "replayed deviation dataset differs from the recorded one\n";
    return kExitRuntime;
  }
  if (!a.out.empty()) write_rows_and_metrics(a.out, rows, cell_metrics(rows));
  out << fmt::format("replayed {} runs, {} rows: identical to the recorded runs\n", replayed.size(),
                     rows.size());
  return kExitOk;
}

struct MetricsArgs {
  std::vector<std::string> logs;
  std::string out;
  bool pool_directions = false;
  bool static_subcells = false;
};

int cmd_metrics(const MetricsArgs& a, std::ostream& out, std::ostream& err) {
  const auto logs = load_ok_logs(collect_logs(a.logs), err);
  const auto rows = build_deviation_rows(logs);
  const auto cells = cell_metrics(rows, {a.static_subcells, a.pool_directions});
  if (!a.out.empty()) write_rows_and_metrics(a.out, rows, cells);
  out << fmt::format("runs: {}\nrows: {}\n", logs.size(), rows.size());
  out << format_cell_table(cells);
  return kExitOk;
}

struct RegressArgs {
  std::string rows;
  std::string model = "all";
  std::string lambda = "fit";
  std::string history;
  bool raw_units = false;
  std::string out;
};

std::vector<DeviationRow> read_rows_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path));
  return read_deviation_csv(in);
}

int cmd_regress(const RegressArgs& a, std::ostream& out) {
  std::vector<int> ids = {1, 2, 3, 4};
  if (a.model != "all") ids = parse_int_list(a.model, "--model");
  for (int id : ids) {
    if (id < 1 || id > 4) throw UsageError(fmt::format("--model: {} is not one of 1-4", id));
  }

  RegressionSpec spec;
  spec.min_max = !a.raw_units;
  if (a.lambda == "fit") {
    spec.transform.kind = ResponseTransform::Kind::kFit;
  } else if (a.lambda == "none") {
    spec.transform.kind = ResponseTransform::Kind::kNone;
  } else {
    try {
      spec.transform = {ResponseTransform::Kind::kFixed, parse_number(a.lambda)};
    } catch (const InvalidArgument&) {
      throw UsageError(fmt::format("--lambda: expected fit, none or a number, got '{}'", a.lambda));
    }
  }
  if (!a.history.empty()) {
    for (const auto& token : split_tokens(a.history)) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw UsageError(fmt::format("--history: '{}' is not window=value", token));
      try {
        const double w = parse_number(token.substr(0, eq));
        spec.history_levels[static_cast<int>(w)] = parse_number(token.substr(eq + 1));
      } catch (const InvalidArgument& e) {
        throw UsageError(fmt::format("--history: {}", e.what()));
      }
    }
  }

  const auto rows = read_rows_file(a.rows);
  const ModelSet models = run_models(rows, spec, ids);
  if (models.degenerate_response) {
    out << fmt::format(
        "zero-variance response: every deviation equals {}; the Yeo-Johnson fit is skipped, "
        "slopes are zero and R^2 is undefined\n",
        format_double(rows.front().deviation));
  }
  out << format_regression_table(models);
  if (!a.out.empty()) {
    write_file_atomic(a.out, render([&](std::ostream& s) { write_regression_csv(s, models); }));
  }
  return kExitOk;
}

struct ExportArgs {
  std::vector<std::string> cells;
  std::string out;
};

int cmd_export_plot(const ExportArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<DeviationRow> rows;
  if (a.cells.size() == 1 && fs::path(a.cells.front()).extension() == ".csv") {
    rows = read_rows_file(a.cells.front());
  } else {
    rows = build_deviation_rows(load_ok_logs(collect_logs(a.cells), err));
  }
  const auto stats = box_plot_series(rows);
  const std::string csv = render([&](std::ostream& s) { write_box_plot_csv(s, stats); });
  if (a.out.empty()) {
    out << csv;
  } else {
    write_file_atomic(a.out, csv);
    std::vector<std::string> series;
    for (const auto& b : stats) {
      if (series.empty() || series.back() != b.series) series.push_back(b.series);
    }
    out << fmt::format("series: {}\nticks: {}\noutput: {}\n", series.size(), stats.size(), a.out);
  }
  return kExitOk;
}

void add_types_flags(CLI::App* cmd, std::string& types, std::string& types_file, int& population) {
  cmd->add_option("--types", types, "Standalone values: a..b (integers) or a comma list");
  cmd->add_option("--types-file", types_file, "File of standalone values, '#' starts a comment");
  cmd->add_option("--population", population, "Population for the default 0..K-1 grid")
      ->capture_default_str();
}

}  // namespace

std::vector<double> parse_types(const std::string& text) {
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const double lo = parse_number(text.substr(0, dots));
    const double hi = parse_number(text.substr(dots + 2));
    if (lo != std::floor(lo) || hi != std::floor(hi) || hi < lo || hi - lo > 1e7) {
      throw InvalidArgument(fmt::format("'{}' is not an integer range a..b with a <= b", text));
    }
    std::vector<double> out;
    for (double v = lo; v <= hi; v += 1.0) out.push_back(v);
    return out;
  }
  std::vector<double> out;
  for (const auto& t : split_tokens(text)) out.push_back(parse_number(t));
  if (out.empty()) throw InvalidArgument("no standalone values given");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Network-effect participation game: equilibrium solver, experiment runner and analysis"};
  app.name(args.empty() ? "feesim" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  SolveArgs solve;
  auto* c_solve = app.add_subcommand("solve", "Fixed points and selected FEE for one price");
  c_solve->add_option("--beta", solve.beta, "Network-effect strength")->required();
  c_solve->add_option("--price", solve.price, "Posted price")->required();
  add_types_flags(c_solve, solve.types, solve.types_file, solve.population);

  PricesArgs prices;
  auto* c_prices = app.add_subcommand("prices", "Designed equilibrium prices ordered per trajectory");
  c_prices->add_option("--beta", prices.beta, "Network-effect strength")->required();
  c_prices->add_option("--kind", prices.kind, "static|increasing|decreasing|converging|diverging|all")
      ->check(CLI::IsMember({"all", "static", "increasing", "decreasing", "converging", "diverging"}))
      ->capture_default_str();
  c_prices->add_option("--targets", prices.targets, "Target participation counts")->capture_default_str();
  c_prices->add_option("--offset", prices.offset, "Distance below the interval's upper end")
      ->capture_default_str();
  add_types_flags(c_prices, prices.types, prices.types_file, prices.population);

  RunArgs run_args;
  auto* c_run = app.add_subcommand("run", "Run the factorial experiment and write run logs");
  auto* config_opt = c_run->add_option("--config", run_args.config, "Experiment config (JSON)");
  c_run->add_option("--profile", run_args.profile, "Built-in profile: paper|extended")
      ->check(CLI::IsMember({"paper", "extended"}))
      ->excludes(config_opt)
      ->capture_default_str();
  c_run->add_option("--agent", run_args.agent, "Override the agent kind")
      ->check(CLI::IsMember({"rational", "heuristic", "gateway"}));
  c_run->add_option("--out", run_args.out, "Output directory (overrides the config)");
  c_run->add_option("--threads", run_args.threads, "Worker threads, 0 for the OpenMP default")
      ->check(CLI::NonNegativeNumber);
  c_run->add_flag("--serial", run_args.serial, "Run cells one after another");

  ReplayArgs replay;
  auto* c_replay = app.add_subcommand("replay", "Re-execute run logs from their recorded decisions");
  c_replay->add_option("--log", replay.logs, "Run log file or directory")->required();
  c_replay->add_option("--out", replay.out, "Directory for the reconstructed rows.csv/metrics.csv");

  MetricsArgs metrics;
  auto* c_metrics = app.add_subcommand("metrics", "Deviation rows and per-cell RMSE from run logs");
  c_metrics->add_option("--logs", metrics.logs, "Run log files or directories")->required();
  c_metrics->add_option("--out", metrics.out, "Directory for rows.csv and metrics.csv");
  c_metrics->add_flag("--pool-directions", metrics.pool_directions,
                      "Pool increasing+decreasing and converging+diverging");
  c_metrics->add_flag("--static-subcells", metrics.static_subcells, "Also report each static price");

  RegressArgs regress;
  auto* c_regress = app.add_subcommand("regress", "Individual-level OLS with HC3 standard errors");
  c_regress->add_option("--rows", regress.rows, "Deviation rows CSV")->required()->check(CLI::ExistingFile);
  c_regress->add_option("--model", regress.model, "Model id(s) 1-4 or all")->capture_default_str();
  c_regress->add_option("--lambda", regress.lambda, "Yeo-Johnson lambda: fit|none|<value>")
      ->capture_default_str();
  c_regress->add_option("--history", regress.history, "History levels, e.g. 1=0,3=0.5,6=1");
  c_regress->add_flag("--raw-units", regress.raw_units, "Skip min-max scaling of Price and theta");
  c_regress->add_option("--out", regress.out, "Coefficient CSV");

  ExportArgs export_args;
  auto* c_export = app.add_subcommand("export-plot", "Box-plot quantiles and FEE series per panel");
  c_export->add_option("--cells", export_args.cells, "Run logs (files or directories) or one rows CSV")
      ->required();
  c_export->add_option("--out", export_args.out, "Output CSV (stdout when omitted)");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  if (argv.empty()) argv.push_back("feesim");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_solve->parsed()) return cmd_solve(solve, out);
    if (c_prices->parsed()) return cmd_prices(prices, out);
    if (c_run->parsed()) return cmd_run(run_args, out, err);
    if (c_replay->parsed()) return cmd_replay(replay, out, err);
    if (c_metrics->parsed()) return cmd_metrics(metrics, out, err);
    if (c_regress->parsed()) return cmd_regress(regress, out);
    if (c_export->parsed()) return cmd_export_plot(export_args, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace feesim::cli
