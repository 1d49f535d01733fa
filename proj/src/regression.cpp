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

#include "feesim/regression.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "feesim/kernels.hpp"
#include "feesim/stats.hpp"

namespace feesim {

std::vector<std::string> model_regressors(int model_id) {
  std::vector<std::string> names = {"Price", "NE", "theta", "History"};
  if (model_id < 1 || model_id > 4) {
    throw InvalidArgument(fmt::format("unknown model {} (expected 1-4)", model_id));
  }
  if (model_id >= 2) names.push_back("Price:theta");
  if (model_id == 3) names.insert(names.end(), {"NE:History", "NE:Price", "NE:theta"});
  if (model_id == 4) names.insert(names.end(), {"NE:History", "Price:History", "theta:History"});
  return names;
}

namespace {

struct Scaler {
  double lo = 0.0;
  double span = 1.0;
  double operator()(double v) const { return (v - lo) / span; }
};

Scaler min_max_scaler(std::span<const DeviationRow> rows, double DeviationRow::*field,
                      std::string_view name) {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& r : rows) {
    lo = std::min(lo, r.*field);
    hi = std::max(hi, r.*field);
  }
  if (!(hi > lo)) {
    throw InvalidArgument(fmt::format("{} is constant over the sample; cannot normalize", name));
  }
  return {lo, hi - lo};
}

std::map<int, double> default_history_levels(std::span<const DeviationRow> rows) {
  std::set<int> windows;
  for (const auto& r : rows) {
    if (r.window > 0) windows.insert(r.window);
  }
  std::map<int, double> levels = {{0, 0.0}};
  if (windows.size() == 1) {
    levels[*windows.begin()] = 1.0;
  } else {
    int i = 0;
    const double denom = static_cast<double>(windows.size()) - 1.0;
    for (int w : windows) levels[w] = i++ / denom;
  }
  return levels;
}

}  // namespace

Design build_design(std::span<const DeviationRow> rows, const RegressionSpec& spec) {
  if (rows.empty()) throw InvalidArgument("regression sample is empty");
  const auto regressors = model_regressors(spec.model_id);

  Scaler price{0.0, 1.0};
  Scaler theta{0.0, 1.0};
  if (spec.min_max) {
    price = min_max_scaler(rows, &DeviationRow::price, "Price");
    theta = min_max_scaler(rows, &DeviationRow::theta, "theta");
  }
  const Scaler ne = min_max_scaler(rows, &DeviationRow::beta, "NE (beta level)");
  const auto levels = spec.history_levels.empty() ? default_history_levels(rows) : spec.history_levels;

  std::set<TrajectoryKind> paths;
  for (const auto& r : rows) paths.insert(r.path);
  std::vector<TrajectoryKind> dummies;
  for (TrajectoryKind k : kAllTrajectoryKinds) {
    if (k != spec.baseline_path && paths.count(k)) dummies.push_back(k);
  }

  struct Row {
    double price, ne, theta, history;
  };
  const std::map<std::string, std::function<double(const Row&)>> columns = {
      {"Price", [](const Row& r) { return r.price; }},
      {"NE", [](const Row& r) { return r.ne; }},
      {"theta", [](const Row& r) { return r.theta; }},
      {"History", [](const Row& r) { return r.history; }},
      {"Price:theta", [](const Row& r) { return r.price * r.theta; }},
      {"NE:History", [](const Row& r) { return r.ne * r.history; }},
      {"NE:Price", [](const Row& r) { return r.ne * r.price; }},
      {"NE:theta", [](const Row& r) { return r.ne * r.theta; }},
      {"Price:History", [](const Row& r) { return r.price * r.history; }},
      {"theta:History", [](const Row& r) { return r.theta * r.history; }},
  };

  Design d;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(1 + regressors.size() + dummies.size());
  d.x.resize(n, p);
  d.y.resize(n);
  d.names.push_back("(Intercept)");
  d.names.insert(d.names.end(), regressors.begin(), regressors.end());
  for (TrajectoryKind k : dummies) d.names.push_back(fmt::format("path[{}]", to_string(k)));

  std::vector<double> deviations(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    auto level = levels.find(r.window);
    if (level == levels.end()) {
      throw InvalidArgument(fmt::format("no History level configured for window {}", r.window));
    }
    const Row v{price(r.price), ne(r.beta), theta(r.theta), level->second};
    Eigen::Index col = 0;
    d.x(i, col++) = 1.0;
    for (const auto& name : regressors) d.x(i, col++) = columns.at(name)(v);
    for (TrajectoryKind k : dummies) d.x(i, col++) = r.path == k ? 1.0 : 0.0;
    deviations[static_cast<std::size_t>(i)] = r.deviation;
  }
  if (d.x.col(4).maxCoeff() == d.x.col(4).minCoeff()) {
    throw InvalidArgument("History is constant over the sample");
  }

  switch (spec.transform.kind) {
    case ResponseTransform::Kind::kNone:
      break;
    case ResponseTransform::Kind::kFixed:
      d.lambda = spec.transform.lambda;
      break;
    case ResponseTransform::Kind::kFit:
      d.lambda = fit_lambda(deviations);
      break;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = deviations[static_cast<std::size_t>(i)];
    d.y(i) = d.lambda ? yeo_johnson(y, *d.lambda) : y;
  }
  return d;
}

double FitResult::z(Eigen::Index i) const {
  return std_errors(i) > 0.0 ? coefficients(i) / std_errors(i) : NAN;
}

double FitResult::p_value(Eigen::Index i) const {
  const double t = z(i);
  return std::isnan(t) ? NAN : std::erfc(std::abs(t) / std::sqrt(2.0));
}

std::optional<double> FitResult::coefficient(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return coefficients(static_cast<Eigen::Index>(i));
  }
  return std::nullopt;
}

namespace {

constexpr double kRankTolerance = 1e-10;

// Walks the columns left to right; the first one lying in the span of its
// predecessors is reported together with the predecessors it depends on.
[[noreturn]] void report_dependence(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
  std::vector<Eigen::Index> basis;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Eigen::VectorXd col = x.col(j);
    const double norm = col.norm();
    if (norm == 0.0) {
      throw RankDeficiency(fmt::format("column '{}' is identically zero", names[j]), {names[j]});
    }
    if (!basis.empty()) {
      Eigen::MatrixXd sub(x.rows(), static_cast<Eigen::Index>(basis.size()));
      for (std::size_t b = 0; b < basis.size(); ++b) sub.col(static_cast<Eigen::Index>(b)) = x.col(basis[b]);
      const Eigen::VectorXd coef = sub.colPivHouseholderQr().solve(col);
      if ((sub * coef - col).norm() <= 1e-8 * norm) {
        std::vector<std::string> involved;
        for (std::size_t b = 0; b < basis.size(); ++b) {
          if (std::abs(coef(static_cast<Eigen::Index>(b))) > 1e-8) involved.push_back(names[basis[b]]);
        }
        involved.push_back(names[j]);
        throw RankDeficiency(fmt::format("design is rank deficient: columns {} are linearly dependent",
                                         fmt::join(involved, ", ")),
                             involved);
      }
    }
    basis.push_back(j);
  }
  throw RankDeficiency("design is numerically rank deficient", names);
}

}  // namespace

FitResult ols_hc3(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> names) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (names.size() != static_cast<std::size_t>(p)) {
    throw InvalidArgument("one name per design column is required");
  }
  if (y.size() != n) throw InvalidArgument("response length differs from design rows");
  if (n <= p) throw InvalidArgument(fmt::format("need more rows ({}) than columns ({})", n, p));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted(x);
  pivoted.setThreshold(kRankTolerance);
  if (pivoted.rank() < p) report_dependence(x, names);

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  FitResult fit;
  fit.names = std::move(names);
  fit.n_obs = static_cast<int>(n);
  fit.coefficients = qr.solve(y);
  fit.residuals = y - x * fit.coefficients;

  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  fit.leverage = q.rowwise().squaredNorm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (fit.leverage(i) >= 1.0 - 1e-12) {
      throw LeverageSingularity(
          fmt::format("observation {} has leverage 1; HC3 is undefined", i), i);
    }
  }

  const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd bread = r_inv * r_inv.transpose();
  fit.covariance = bread * par::hc3_meat(x, fit.residuals, fit.leverage) * bread;
  fit.std_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();

  const double ssr = fit.residuals.squaredNorm();
  const double sst = (y.array() - y.mean()).matrix().squaredNorm();
  if (sst > 0.0) fit.r_squared = 1.0 - ssr / sst;
  return fit;
}

ModelSet run_models(std::span<const DeviationRow> rows, RegressionSpec base,
                    std::vector<int> model_ids) {
  if (rows.empty()) throw InvalidArgument("regression sample is empty");
  ModelSet out;
  out.model_ids = std::move(model_ids);

  const double first = rows.front().deviation;
  out.degenerate_response = std::all_of(rows.begin(), rows.end(),
                                        [&](const DeviationRow& r) { return r.deviation == first; });

  RegressionSpec spec = base;
  if (out.degenerate_response) {
    spec.transform.kind = ResponseTransform::Kind::kNone;
  } else if (base.transform.kind == ResponseTransform::Kind::kFit) {
    std::vector<double> ys(rows.size());
    std::transform(rows.begin(), rows.end(), ys.begin(),
                   [](const DeviationRow& r) { return r.deviation; });
    out.lambda = fit_lambda(ys);
    spec.transform = {ResponseTransform::Kind::kFixed, *out.lambda};
  } else if (base.transform.kind == ResponseTransform::Kind::kFixed) {
    out.lambda = base.transform.lambda;
  }
  out.base = spec;

  out.fits.resize(out.model_ids.size());
  std::vector<std::exception_ptr> errors(out.model_ids.size());
  const long m = static_cast<long>(out.model_ids.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < m; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      RegressionSpec s = spec;
      s.model_id = out.model_ids[idx];
      Design d = build_design(rows, s);
      out.fits[idx] = ols_hc3(d.x, d.y, std::move(d.names));
      out.fits[idx].lambda = d.lambda;
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string stars(double p_value) {
  if (std::isnan(p_value)) return "";
  if (p_value < 0.01) return "***";
  if (p_value < 0.05) return "**";
  return "";
}

std::string format_regression_table(const ModelSet& models) {
  std::vector<std::string> terms;
  for (const auto& fit : models.fits) {
    for (const auto& name : fit.names) {
      if (name == "(Intercept)" || name.rfind("path[", 0) == 0) continue;
      if (std::find(terms.begin(), terms.end(), name) == terms.end()) terms.push_back(name);
    }
  }
  constexpr int kTermWidth = 16;
  constexpr int kColWidth = 14;
  std::string out = fmt::format("{:<{}}", "Variable", kTermWidth);
  for (int id : models.model_ids) out += fmt::format("{:>{}}", fmt::format("Model {}", id), kColWidth);
  const std::string rule(static_cast<std::size_t>(kTermWidth + kColWidth * static_cast<int>(models.fits.size())), '-');
  out += "\n" + rule + "\n";

  for (const auto& term : terms) {
    std::string coef_line = fmt::format("{:<{}}", term, kTermWidth);
    std::string se_line = fmt::format("{:<{}}", "", kTermWidth);
    for (const auto& fit : models.fits) {
      auto it = std::find(fit.names.begin(), fit.names.end(), term);
      if (it == fit.names.end()) {
        coef_line += fmt::format("{:>{}}", "---", kColWidth);
        se_line += fmt::format("{:>{}}", "", kColWidth);
        continue;
      }
      const auto i = static_cast<Eigen::Index>(it - fit.names.begin());
      coef_line += fmt::format("{:>{}}", fmt::format("{:.3f}{}", fit.coefficients(i), stars(fit.p_value(i))), kColWidth);
      se_line += fmt::format("{:>{}}", fmt::format("({:.3f})", fit.std_errors(i)), kColWidth);
    }
    out += coef_line + "\n" + se_line + "\n";
  }
  out += rule + "\n";
  out += fmt::format("{:<{}}", "Path FE", kTermWidth);
  for (std::size_t i = 0; i < models.fits.size(); ++i) out += fmt::format("{:>{}}", "Included", kColWidth);
  out += fmt::format("\n{:<{}}", "# Obs", kTermWidth);
  for (const auto& fit : models.fits) out += fmt::format("{:>{}}", fit.n_obs, kColWidth);
  out += fmt::format("\n{:<{}}", "R^2", kTermWidth);
  for (const auto& fit : models.fits) {
    out += fmt::format("{:>{}}", fit.r_squared ? fmt::format("{:.3f}", *fit.r_squared) : "undefined", kColWidth);
  }
  out += "\n" + rule + "\n";
  out += "Notes: *** p<0.01; ** p<0.05 (normal approximation). HC3 robust SEs in parentheses.\n";
  if (models.degenerate_response) {
    out += "Response has zero variance (every deviation identical): no transform applied, R^2 undefined.\n";
  } else if (models.lambda) {
    out += fmt::format("Response: Yeo-Johnson transformed deviation, pooled lambda = {:.6f}.\n", *models.lambda);
  } else {
    out += "Response: untransformed deviation.\n";
  }
  out += fmt::format(
      "Assumptions: Price and theta {}; NE = beta rescaled to {{0, 1}}; History levels {}; "
      "baseline path {}.\n",
      models.base.min_max ? "min-max normalized over the sample" : "in raw units",
      models.base.history_levels.empty() ? "evenly spaced over ascending windows (static = 0)"
                                         : "user supplied",
      to_string(models.base.baseline_path));
  return out;
}

void write_regression_csv(std::ostream& out, const ModelSet& models) {
  out << "model,term,estimate,se,z,p,stars\n";
  for (std::size_t m = 0; m < models.fits.size(); ++m) {
    const auto& fit = models.fits[m];
    const int id = models.model_ids[m];
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      out << id << ',' << fit.names[i] << ',' << format_double(fit.coefficients(k)) << ','
          << format_double(fit.std_errors(k)) << ',' << format_double(fit.z(k)) << ','
          << format_double(fit.p_value(k)) << ',' << stars(fit.p_value(k)) << '\n';
    }
    out << id << ",R2," << (fit.r_squared ? format_double(*fit.r_squared) : "") << ",,,,\n";
    out << id << ",N," << fit.n_obs << ",,,,\n";
  }
}

}  // namespace feesim
