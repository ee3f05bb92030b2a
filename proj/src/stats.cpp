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

#include "dialsid/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

namespace dialsid {
namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void require_p_value_domain(Eigen::Index n) {
  if (n < 3) throw CorrelationError("p-values need at least three observations");
}

}  // namespace

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
  return t >= 0.0 ? 1.0 - tail : tail;
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) throw CorrelationError("p-values need at least three observations");
  const double df = static_cast<double>(n - 2);
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  const double t2 = r2 * df / (1.0 - r2);
  return std::clamp(boost::math::ibeta(df / 2.0, 0.5, df / (df + t2)), 0.0, 1.0);
}

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto n = x.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });
  Eigen::VectorXd ranks(n);
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

Correlation pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y) {
  require_p_value_domain(x.size());
  const double r = pearson_r(x, y);
  return {r, correlation_p_value(r, static_cast<std::size_t>(x.size()))};
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  return pearson(as_vector(x), as_vector(y));
}

Correlation spearman(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y, SpearmanPValue method) {
  if (x.size() != y.size()) throw CorrelationError("correlation inputs differ in length");
  require_p_value_domain(x.size());
  const Eigen::VectorXd rx = average_ranks(x);
  const Eigen::VectorXd ry = average_ranks(y);
  const double rho = pearson_r(rx, ry);
  if (method == SpearmanPValue::kStudentT) {
    return {rho, correlation_p_value(rho, static_cast<std::size_t>(x.size()))};
  }
  if (x.size() > 10) throw CorrelationError("exact permutation p-values need n <= 10");

  // Permute the y ranks against fixed x ranks and count orders at least as extreme.
  const Eigen::ArrayXd xc = rx.array() - rx.mean();
  const double sxx = xc.square().sum();
  const Eigen::ArrayXd ycentered = ry.array() - ry.mean();
  const double syy = ycentered.square().sum();
  std::vector<double> perm(ycentered.data(), ycentered.data() + ycentered.size());
  std::sort(perm.begin(), perm.end());
  const double observed = std::abs(rho) - 1e-12;
  std::size_t extreme = 0;
  std::size_t total = 0;
  do {
    double cross = 0.0;
    for (Eigen::Index i = 0; i < xc.size(); ++i) cross += xc[i] * perm[static_cast<std::size_t>(i)];
    if (std::abs(cross / std::sqrt(sxx * syy)) >= observed) ++extreme;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  // With tied ranks next_permutation visits each distinct arrangement once;
  // every one stands for the same number of full permutations.
  return {rho, static_cast<double>(extreme) / static_cast<double>(total)};
}

Correlation spearman(std::span<const double> x, std::span<const double> y, SpearmanPValue method) {
  return spearman(as_vector(x), as_vector(y), method);
}

CorrelationResult correlate(std::span<const double> x, std::span<const double> y,
                            SpearmanPValue method) {
  const auto p = pearson(x, y);
  const auto s = spearman(x, y, method);
  return {p.coefficient, p.p_value, s.coefficient, s.p_value, x.size()};
}

}  // namespace dialsid
