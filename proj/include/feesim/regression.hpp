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

#ifndef FEESIM_REGRESSION_HPP_
#define FEESIM_REGRESSION_HPP_

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "feesim/metrics.hpp"

namespace feesim {

// How the deviation is transformed before fitting.
struct ResponseTransform {
  enum class Kind { kNone, kFixed, kFit };
  Kind kind = Kind::kFit;
  double lambda = 1.0;  // used when kind == kFixed
};

struct RegressionSpec {
  int model_id = 1;  // 1..4
  ResponseTransform transform;
  // Rescale Price and theta to [0, 1] by sample min and max.
  bool min_max = true;
  // Explicit window -> History value. When empty, positive windows are
  // spread evenly over [0, 1] in ascending order and window 0 maps to 0.
  std::map<int, double> history_levels;
  TrajectoryKind baseline_path = TrajectoryKind::kStatic;
};

// Regressor names per model, excluding intercept and path dummies.
//   M1: Price NE theta History
//   M2: M1 + Price:theta
//   M3: M2 + NE:History NE:Price NE:theta
//   M4: M2 + NE:History Price:History theta:History
std::vector<std::string> model_regressors(int model_id);

struct Design {
  Eigen::MatrixXd x;  // intercept first, then regressors, then dummies
  Eigen::VectorXd y;
  std::vector<std::string> names;
  std::optional<double> lambda;
};

// Throws InvalidArgument on an empty sample, an unknown model id, or a
// constant normalized column (e.g. a single beta level makes NE constant).
Design build_design(std::span<const DeviationRow> rows, const RegressionSpec& spec);

class RankDeficiency : public Error {
 public:
  RankDeficiency(const std::string& what, std::vector<std::string> columns)
      : Error(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class LeverageSingularity : public Error {
 public:
  LeverageSingularity(const std::string& what, Eigen::Index row) : Error(what), row_(row) {}
  Eigen::Index row() const { return row_; }

 private:
  Eigen::Index row_;
};

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;  // HC3
  Eigen::MatrixXd covariance;  // HC3
  std::optional<double> r_squared;  // unset when the response has no variance
  int n_obs = 0;
  Eigen::VectorXd residuals;
  Eigen::VectorXd leverage;
  std::optional<double> lambda;

  double z(Eigen::Index i) const;
  double p_value(Eigen::Index i) const;  // two-sided, normal approximation
  std::optional<double> coefficient(std::string_view name) const;
};

// Least squares by Householder QR; HC3 covariance
//   (X'X)^-1 X' diag(e_i^2 / (1 - h_ii)^2) X (X'X)^-1.
// Throws RankDeficiency naming the dependent columns, or
// LeverageSingularity when some h_ii reaches 1.
FitResult ols_hc3(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                  std::vector<std::string> names);

struct ModelSet {
  std::optional<double> lambda;      // pooled, shared by all four models
  bool degenerate_response = false;  // every deviation identical
  std::vector<int> model_ids;
  std::vector<FitResult> fits;
  RegressionSpec base;
};

// Fits the requested models under one lambda fitted on the pooled
// deviations. A constant response skips the transform and reports R^2 as
// undefined.
ModelSet run_models(std::span<const DeviationRow> rows, RegressionSpec base = {},
                    std::vector<int> model_ids = {1, 2, 3, 4});

std::string stars(double p_value);  // "***" p<0.01, "**" p<0.05

// Coefficient table laid out one column per model, SEs in parentheses.
std::string format_regression_table(const ModelSet& models);
// model,term,estimate,se,z,p,stars ; plus R2 and N rows per model.
void write_regression_csv(std::ostream& out, const ModelSet& models);

}  // namespace feesim

#endif  // FEESIM_REGRESSION_HPP_
