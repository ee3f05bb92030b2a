// Copyright 2026 The dialsid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Pearson and Spearman correlation with two-tailed p-values.
//
// p-values use t = r * sqrt((n - 2) / (1 - r^2)) against Student's t with
// n - 2 degrees of freedom; the tail mass is the regularized incomplete beta
// I_{df / (df + t^2)}(df / 2, 1 / 2).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace dialsid {

class CorrelationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Correlation {
  double coefficient = 0.0;
  double p_value = 1.0;
};

struct CorrelationResult {
  double r = 0.0;
  double p_r = 1.0;
  double rho = 0.0;
  double p_rho = 1.0;
  std::size_t n = 0;
};

// Student's t cumulative distribution function.
double student_t_cdf(double t, double df);

// Two-tailed p for a sample correlation coefficient over n observations.
double correlation_p_value(double r, std::size_t n);

// Average ranks (1-based); ties share the mean of their positions.
Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& x);

// Sample Pearson coefficient of two equally sized vectors. Any dense
// expression is accepted, e.g. pearson_r(a.array().log(), b).
template <typename DerivedX, typename DerivedY>
double pearson_r(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y) {
  if (x.size() != y.size()) throw CorrelationError("correlation inputs differ in length");
  if (x.size() < 2) throw CorrelationError("correlation needs at least two observations");
  const Eigen::ArrayXd xa = x.derived().template cast<double>().array();
  const Eigen::ArrayXd ya = y.derived().template cast<double>().array();
  if (xa.maxCoeff() == xa.minCoeff() || ya.maxCoeff() == ya.minCoeff()) {
    throw CorrelationError("correlation undefined for a constant input");
  }
  const Eigen::ArrayXd xc = xa - xa.mean();
  const Eigen::ArrayXd yc = ya - ya.mean();
  const double r = (xc * yc).sum() / std::sqrt(xc.square().sum() * yc.square().sum());
  return std::clamp(r, -1.0, 1.0);
}

Correlation pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y);
Correlation pearson(std::span<const double> x, std::span<const double> y);

enum class SpearmanPValue {
  kStudentT,
  // Exact two-tailed permutation p over all n! rank orders; n <= 10.
  kExactPermutation,
};

Correlation spearman(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y,
                     SpearmanPValue method = SpearmanPValue::kStudentT);
Correlation spearman(std::span<const double> x, std::span<const double> y,
                     SpearmanPValue method = SpearmanPValue::kStudentT);

CorrelationResult correlate(std::span<const double> x, std::span<const double> y,
                            SpearmanPValue method = SpearmanPValue::kStudentT);

}  // namespace dialsid
