// Copyright 2026 The scoretrend Authors
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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "scoretrend/error.hpp"
#include "scoretrend/inference.hpp"

namespace scoretrend {
namespace {

Hyperparams random_theta(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {2.0 * u(rng), std::exp(0.8 * u(rng) + 1.5), std::exp(0.8 * u(rng) + 1.2),
          std::exp(0.5 * u(rng))};
}

ScoreSeries random_series(std::mt19937_64& rng, int n) {
  ScoreSeries s;
  std::uniform_real_distribution<double> t(0.1, 48.0);
  std::normal_distribution<double> d(0.0, 6.0);
  for (int i = 0; i < n; ++i) s.times.push_back(t(rng));
  std::sort(s.times.begin(), s.times.end());
  for (int i = 0; i < n; ++i) s.diffs.push_back(std::round(d(rng)));
  return s;
}

double oracle_loglik(const Hyperparams& th, const ScoreSeries& s) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd k = gram(0, 0, s.times, s.times, th);
  k.diagonal().array() += th.sigma * th.sigma;
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(s.diffs.data(), n);
  return testing::dense_mvn_logpdf_no_constant(
      y, Eigen::VectorXd::Constant(n, th.beta), k);
}

TEST(MarginalLoglik, SingleObservation) {
  ScoreSeries s;
  s.times = {12.0};
  s.diffs = {3.0};
  const Hyperparams th{3.0, 2.0, 5.0, 1.5};
  EXPECT_NEAR(marginal_loglik(th, s), -0.5 * std::log(4.0 + 2.25), 1e-14);
}

TEST(MarginalLoglik, ShiftInvariance) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const auto th = random_theta(rng);
    const auto s = random_series(rng, 20);
    ScoreSeries shifted = s;
    for (auto& d : shifted.diffs) d += 7.0;
    Hyperparams th2 = th;
    th2.beta += 7.0;
    EXPECT_NEAR(marginal_loglik(th, s), marginal_loglik(th2, shifted), 1e-9);
  }
}

TEST(MarginalLoglik, MatchesDenseMvnDensity) {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 100; ++rep) {
    const auto th = random_theta(rng);
    const auto s = random_series(rng, 6);
    EXPECT_NEAR(marginal_loglik(th, s), oracle_loglik(th, s), 1e-9);
  }
}

TEST(MarginalLoglik, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const auto th = random_theta(rng);
    const auto s = random_series(rng, 30);
    const auto g = marginal_loglik_gradient(th, s);
    EXPECT_NEAR(g.value, marginal_loglik(th, s), 1e-9);
    const auto u = to_unconstrained(th);
    for (int k = 0; k < 4; ++k) {
      const double h = 1e-5;
      UnconstrainedParams up = u, dn = u;
      up(k) += h;
      dn(k) -= h;
      const double fd = (marginal_loglik(from_unconstrained(up), s) -
                         marginal_loglik(from_unconstrained(dn), s)) /
                        (2 * h);
      EXPECT_NEAR(g.gradient(k), fd, 1e-5 * std::max(1.0, std::abs(fd))) << k;
    }
  }
}

TEST(Unconstrained, RoundTrip) {
  const Hyperparams th{-1.5, 3.0, 0.25, 7.0};
  const auto back = from_unconstrained(to_unconstrained(th));
  EXPECT_NEAR(back.beta, th.beta, 1e-15);
  EXPECT_NEAR(back.alpha, th.alpha, 1e-14);
  EXPECT_NEAR(back.rho, th.rho, 1e-15);
  EXPECT_NEAR(back.sigma, th.sigma, 1e-14);
  EXPECT_DOUBLE_EQ(to_unconstrained(th)(2), std::log(0.25));
}

}  // namespace
}  // namespace scoretrend
