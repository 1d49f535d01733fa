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

#include "feesim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "feesim/kernels.hpp"

namespace feesim {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<DeviationRow> build_deviation_rows(std::span<const RunLog> logs) {
  return par::deviation_rows(logs);
}

double rmse(std::span<const DeviationRow> rows) {
  if (rows.empty()) throw InvalidArgument("rmse of an empty cell");
  return std::sqrt(par::sum_squares(rows) / static_cast<double>(rows.size()));
}

namespace {

std::string pooled_path(TrajectoryKind kind, bool pool) {
  if (!pool) return std::string(to_string(kind));
  switch (kind) {
    case TrajectoryKind::kIncreasing:
    case TrajectoryKind::kDecreasing:
      return "monotonic";
    case TrajectoryKind::kConverging:
    case TrajectoryKind::kDiverging:
      return "non-monotonic";
    default:
      return std::string(to_string(kind));
  }
}

int path_order(const std::string& path) {
  static const std::map<std::string, int> order = {
      {"static", 0},     {"increasing", 1}, {"decreasing", 2},   {"converging", 3},
      {"diverging", 4},  {"monotonic", 5},  {"non-monotonic", 6}};
  auto it = order.find(path);
  return it == order.end() ? 99 : it->second;
}

// (beta, path order, path, window, agent, seed, static sub-cell price)
using CellKey = std::tuple<double, int, std::string, int, std::string, std::uint64_t, double>;
constexpr double kNoPrice = -1.0;

CellMetrics summarize(const CellKey& key, std::span<const DeviationRow> rows) {
  CellMetrics m;
  m.beta = std::get<0>(key);
  m.path = std::get<2>(key);
  m.window = std::get<3>(key);
  m.agent = std::get<4>(key);
  m.seed = std::get<5>(key);
  if (std::get<6>(key) != kNoPrice) m.price = std::get<6>(key);

  std::set<std::pair<TrajectoryKind, int>> rounds;
  std::set<int> agents;
  double sum = 0.0;
  for (const auto& r : rows) {
    rounds.emplace(r.path, r.round_index);
    agents.insert(r.agent_id);
    sum += r.deviation;
  }
  m.rounds = static_cast<int>(rounds.size());
  m.agents = static_cast<int>(agents.size());
  m.rmse = rmse(rows);
  m.mean_deviation = sum / static_cast<double>(rows.size());
  if (rows.size() > 1) {
    double ss = 0.0;
    for (const auto& r : rows) ss += (r.deviation - m.mean_deviation) * (r.deviation - m.mean_deviation);
    m.sd_deviation = std::sqrt(ss / static_cast<double>(rows.size() - 1));
  }
  return m;
}

}  // namespace

std::vector<CellMetrics> cell_metrics(std::span<const DeviationRow> rows,
                                      const MetricsOptions& options) {
  std::map<CellKey, std::vector<DeviationRow>> groups;
  for (const auto& r : rows) {
    const std::string path = pooled_path(r.path, options.pool_directions);
    const CellKey key{r.beta, path_order(path), path, r.window, r.agent, r.seed, kNoPrice};
    groups[key].push_back(r);
    if (options.static_subcells && r.path == TrajectoryKind::kStatic) {
      CellKey sub = key;
      std::get<6>(sub) = r.price;
      groups[sub].push_back(r);
    }
  }
  std::vector<CellMetrics> out;
  out.reserve(groups.size());
  for (const auto& [key, members] : groups) out.push_back(summarize(key, members));
  return out;
}

namespace {

constexpr std::string_view kDeviationHeader =
    "beta,ne,path,window,agent,seed,agent_id,theta,round,price,y_hat,y_fee,deviation";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_number(const std::string& text, std::size_t line_no, std::string_view column) {
  T value{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw SchemaError(fmt::format("line {}: bad {} '{}'", line_no, column, text));
  }
  return value;
}

}  // namespace

void write_deviation_csv(std::ostream& out, std::span<const DeviationRow> rows) {
  std::set<double> betas;
  for (const auto& r : rows) betas.insert(r.beta);
  const double strong = betas.empty() ? 0.0 : *betas.rbegin();
  out << kDeviationHeader << '\n';
  for (const auto& r : rows) {
    const int ne = betas.size() > 1 && r.beta == strong ? 1 : 0;
    out << format_double(r.beta) << ',' << ne << ',' << to_string(r.path) << ',' << r.window
        << ',' << r.agent << ',' << r.seed << ',' << r.agent_id << ',' << format_double(r.theta)
        << ',' << r.round_index << ',' << format_double(r.price) << ',' << r.y_hat << ','
        << r.y_fee << ',' << format_double(r.deviation) << '\n';
  }
}

std::vector<DeviationRow> read_deviation_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kDeviationHeader) {
    throw SchemaError(fmt::format("deviation CSV must start with the header '{}'", kDeviationHeader));
  }
  std::vector<DeviationRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 13) {
      throw SchemaError(fmt::format("line {}: expected 13 fields, got {}", line_no, f.size()));
    }
    DeviationRow r;
    r.beta = parse_number<double>(f[0], line_no, "beta");
    try {
      r.path = parse_trajectory_kind(f[2]);
    } catch (const InvalidArgument& e) {
      throw SchemaError(fmt::format("line {}: {}", line_no, e.what()));
    }
    r.window = parse_number<int>(f[3], line_no, "window");
    r.agent = f[4];
    r.seed = parse_number<std::uint64_t>(f[5], line_no, "seed");
    r.agent_id = parse_number<int>(f[6], line_no, "agent_id");
    r.theta = parse_number<double>(f[7], line_no, "theta");
    r.round_index = parse_number<int>(f[8], line_no, "round");
    r.price = parse_number<double>(f[9], line_no, "price");
    r.y_hat = parse_number<int>(f[10], line_no, "y_hat");
    r.y_fee = parse_number<int>(f[11], line_no, "y_fee");
    r.deviation = parse_number<double>(f[12], line_no, "deviation");
    if (r.deviation != static_cast<double>(r.y_hat - r.y_fee)) {
      throw SchemaError(fmt::format("line {}: deviation is not y_hat - y_fee", line_no));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_cell_metrics_csv(std::ostream& out, std::span<const CellMetrics> cells) {
  out << "beta,path,window,agent,seed,price,rounds,agents,rmse,mean_deviation,sd_deviation\n";
  for (const auto& c : cells) {
    out << format_double(c.beta) << ',' << c.path << ',' << c.window << ',' << c.agent << ','
        << c.seed << ',' << (c.price ? fmt::format("{:.2f}", *c.price) : std::string()) << ','
        << c.rounds << ',' << c.agents << ',' << format_double(c.rmse) << ','
        << format_double(c.mean_deviation) << ',' << format_double(c.sd_deviation) << '\n';
  }
}

std::string format_cell_table(std::span<const CellMetrics> cells) {
  std::string out = fmt::format("{:>6} {:<14} {:>6} {:<10} {:>5} {:>7} {:>3} {:>4} {:>9} {:>9} {:>9}\n",
                                "beta", "path", "window", "agent", "seed", "price", "M", "N",
                                "rmse", "mean_Y", "sd_Y");
  for (const auto& c : cells) {
    out += fmt::format("{:>6} {:<14} {:>6} {:<10} {:>5} {:>7} {:>3} {:>4} {:>9.3f} {:>9.3f} {:>9.3f}\n",
                       format_double(c.beta), c.path, c.window, c.agent, c.seed,
                       c.price ? fmt::format("{:.2f}", *c.price) : "-", c.rounds, c.agents,
                       c.rmse, c.mean_deviation, c.sd_deviation);
  }
  return out;
}

}  // namespace feesim
