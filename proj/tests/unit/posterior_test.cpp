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

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "scoretrend/error.hpp"
#include "scoretrend/indices.hpp"
#include "scoretrend/posterior.hpp"

namespace scoretrend {
namespace {

Hyperparams random_theta(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {2.0 * u(rng), std::exp(0.8 * u(rng) + 1.5), std::exp(0.8 * u(rng) + 1.2),
          std::exp(0.5 * u(rng))};
}

std::vector<double> random_times(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> t(0.1, 48.0);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = t(rng);
  std::sort(out.begin(), out.end());
  return out;
}

ScoreSeries random_series(std::mt19937_64& rng, int n) {
  ScoreSeries s;
  s.times = random_times(rng, n);
  std::normal_distribution<double> d(0.0, 6.0);
  for (int i = 0; i < n; ++i) s.diffs.push_back(std::round(d(rng)));
  return s;
}

Eigen::MatrixXd assembled(const PosteriorMoments& m) {
  return joint_covariance(m);
}

TEST(PosteriorMoments, MatchesBruteForceConditioning) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const auto th = random_theta(rng);
    const auto s = random_series(rng, 4);
    const auto grid = random_times(rng, 3);
    const auto m = posterior_moments(s, th, grid);
    const auto oracle = testing::brute_force_posterior(s, th, grid);
    EXPECT_LE((joint_mean(m) - oracle.mean).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((assembled(m) - oracle.cov).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(PosteriorMoments, NearInterpolationWithTinyNoise) {
  for (std::uint64_t seed : {12u, 13u, 14u}) {
    const Hyperparams th{0.0, 8.0, 5.0, 1e-6};
    const auto s = testing::simulate_series(th, 12, seed);
    const auto m = posterior_moments(s, th, s.times);
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_NEAR(m.mu_d(static_cast<Eigen::Index>(i)), s.diffs[i], 1e-3);
    }
  }
}

TEST(PosteriorMoments, FlipSymmetry) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    const auto th = random_theta(rng);
    const auto s = random_series(rng, 15);
    const auto grid = random_times(rng, 7);
    ScoreSeries flipped = s;
    for (auto& d : flipped.diffs) d = -d;
    Hyperparams th_flip = th;
    th_flip.beta = -th.beta;
    const auto a = posterior_moments(s, th, grid);
    const auto b = posterior_moments(flipped, th_flip, grid);
    EXPECT_TRUE((a.mu_d + b.mu_d).isZero(1e-10));
    EXPECT_TRUE((a.mu_d1 + b.mu_d1).isZero(1e-10));
    EXPECT_TRUE((a.mu_d2 + b.mu_d2).isZero(1e-10));
    EXPECT_TRUE(assembled(a).isApprox(assembled(b), 1e-12));
  }
}

TEST(PosteriorMoments, Invariants) {
  std::mt19937_64 rng(14);
  for (int rep = 0; rep < 20; ++rep) {
    const auto th = random_theta(rng);
    const auto s = random_series(rng, 40);
    const auto grid = equidistant_grid(48.0, 49);
    const auto m = posterior_moments(s, th, grid);
    for (const auto* blk : {&m.S_dd, &m.S_d1d1, &m.S_d2d2}) {
      EXPECT_TRUE(blk->isApprox(blk->transpose(), 1e-14));
      EXPECT_GE(blk->diagonal().minCoeff(), 0.0);
    }
    const double prior_d1 = se_cov_partial(1, 1, 0.0, 0.0, th);
    const double prior_d2 = se_cov_partial(2, 2, 0.0, 0.0, th);
    EXPECT_LE(m.S_dd.diagonal().maxCoeff(), th.alpha * th.alpha + 1e-8);
    EXPECT_LE(m.S_d1d1.diagonal().maxCoeff(), prior_d1 + 1e-8);
    EXPECT_LE(m.S_d2d2.diagonal().maxCoeff(), prior_d2 + 1e-8);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double v = m.S_d1d1(i, i) * m.S_d2d2(i, i);
      if (v > 0) {
        EXPECT_LE(std::abs(m.S_d1d2(i, i)) / std::sqrt(v), 1.0 + 1e-9);
      }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assembled(m));
    EXPECT_GE(es.eigenvalues().minCoeff(),
              -1e-8 * std::max(1.0, es.eigenvalues().maxCoeff()));
  }
}

TEST(PosteriorMoments, GridRestrictionConsistency) {
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 10; ++rep) {
    const auto th = random_theta(rng);
    const auto s = random_series(rng, 30);
    const auto grid = random_times(rng, 12);
    std::vector<double> sub;
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < grid.size(); i += 3) {
      sub.push_back(grid[i]);
      idx.push_back(static_cast<Eigen::Index>(i));
    }
    const auto full = posterior_moments(s, th, grid);
    const auto part = posterior_moments(s, th, sub);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const auto i = idx[a];
      const auto ia = static_cast<Eigen::Index>(a);
      EXPECT_NEAR(full.mu_d(i), part.mu_d(ia), 1e-10);
      EXPECT_NEAR(full.mu_d1(i), part.mu_d1(ia), 1e-10);
      EXPECT_NEAR(full.mu_d2(i), part.mu_d2(ia), 1e-10);
      for (std::size_t b = 0; b < idx.size(); ++b) {
        const auto j = idx[b];
        const auto jb = static_cast<Eigen::Index>(b);
        EXPECT_NEAR(full.S_dd(i, j), part.S_dd(ia, jb), 1e-10);
        EXPECT_NEAR(full.S_d1d1(i, j), part.S_d1d1(ia, jb), 1e-10);
        EXPECT_NEAR(full.S_d2d2(i, j), part.S_d2d2(ia, jb), 1e-10);
        EXPECT_NEAR(full.S_dd1(i, j), part.S_dd1(ia, jb), 1e-10);
        EXPECT_NEAR(full.S_dd2(i, j), part.S_dd2(ia, jb), 1e-10);
        EXPECT_NEAR(full.S_d1d2(i, j), part.S_d1d2(ia, jb), 1e-10);
      }
    }
  }
}

TEST(PosteriorMoments, TranslationInvariance) {
  std::mt19937_64 rng(16);
  for (int rep = 0; rep < 10; ++rep) {
    const auto th = random_theta(rng);
    const auto s = random_series(rng, 25);
    const auto grid = random_times(rng, 9);
    const double c = 13.25;
    ScoreSeries moved = s;
    for (auto& t : moved.times) t += c;
    moved.domain_end += c;
    std::vector<double> moved_grid = grid;
    for (auto& t : moved_grid) t += c;
    const auto a = posterior_moments(s, th, grid);
    const auto b = posterior_moments(moved, th, moved_grid);
    EXPECT_TRUE((joint_mean(a) - joint_mean(b)).isZero(1e-9));
    EXPECT_LE((assembled(a) - assembled(b)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(PosteriorMoments, PointwiseMatchesFull) {
  std::mt19937_64 rng(17);
  const auto th = random_theta(rng);
  const auto s = random_series(rng, 50);
  const auto grid = random_times(rng, 30);
  const auto full = posterior_moments(s, th, grid);
  const auto fast = pointwise_moments(s, th, grid);
  const auto slow = full.pointwise();
  EXPECT_TRUE(fast.mu_d.isApprox(slow.mu_d, 1e-12));
  EXPECT_TRUE(fast.mu_d1.isApprox(slow.mu_d1, 1e-12));
  EXPECT_TRUE(fast.mu_d2.isApprox(slow.mu_d2, 1e-12));
  EXPECT_LE((fast.var_d - slow.var_d).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((fast.var_d1 - slow.var_d1).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((fast.var_d2 - slow.var_d2).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((fast.cov_d1d2 - slow.cov_d1d2).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_DOUBLE_EQ(fast.sigma, th.sigma);
  EXPECT_TRUE(fast.predictive_var().isApprox(
      (fast.var_d.array() + th.sigma * th.sigma).matrix()));
}

TEST(PosteriorMoments, DuplicateTimestampsAndInvalidInput) {
  ScoreSeries s;
  s.times = {1.0, 1.0, 1.0, 2.0};
  s.diffs = {2.0, 2.0, 2.0, 0.0};
  const std::vector<double> grid = {1.0, 1.5};
  const Hyperparams th{0.0, 5.0, 3.0, 1e-9};
  const auto m = posterior_moments(s, th, grid);
  EXPECT_TRUE(joint_mean(m).allFinite());
  EXPECT_THROW(posterior_moments(s, th, std::vector<double>{}), Error);
  EXPECT_THROW(posterior_moments(s, Hyperparams{0, -1, 1, 1}, grid), Error);
}

TEST(SampleJointPaths, MeanCovarianceAndDeterminism) {
  std::mt19937_64 rng(18);
  const Hyperparams th{1.0, 6.0, 4.0, 1.5};
  const auto s = random_series(rng, 20);
  const std::vector<double> grid = {3.0, 11.0, 24.0, 40.0};
  const auto m = posterior_moments(s, th, grid);
  const Eigen::Index n = 200000;
  const auto draws = sample_joint_paths(m, n, 99);
  ASSERT_EQ(draws.rows(), n);
  ASSERT_EQ(draws.cols(), 12);
  const Eigen::VectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd centered = draws.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
  const Eigen::VectorXd mu = joint_mean(m);
  for (Eigen::Index k = 0; k < mu.size(); ++k) {
    const double se = std::sqrt(cov(k, k) / double(n));
    EXPECT_LE(std::abs(mean(k) - mu(k)), 4.0 * se) << k;
  }
  const Eigen::MatrixXd sdd = cov.topLeftCorner(4, 4);
  EXPECT_LT((sdd - m.S_dd).norm() / m.S_dd.norm(), 0.02);

  const auto again = sample_joint_paths(m, 10, 5);
  EXPECT_EQ(again, sample_joint_paths(m, 10, 5));
  EXPECT_NE(again, sample_joint_paths(m, 10, 6));
}

TEST(JointSampler, DenseGridStaysFinite) {
  std::mt19937_64 rng(19);
  const Hyperparams th{0.0, 8.0, 6.0, 1.5};
  const auto s = random_series(rng, 60);
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(48.0 * i / 400.0);
  const auto m = posterior_moments(s, th, grid);
  const std::vector<Component> slope = {Component::kSlope};
  const JointSampler sampler(m, slope);
  std::mt19937_64 g(1);
  const auto draws = sampler.draw(200, g);
  EXPECT_EQ(draws.cols(), 401);
  EXPECT_TRUE(draws.allFinite());
}

TEST(MomentsJson, RoundTrip) {
  std::mt19937_64 rng(20);
  const auto th = random_theta(rng);
  const auto s = random_series(rng, 10);
  const auto grid = random_times(rng, 5);
  const auto m = pointwise_moments(s, th, grid);
  const auto back = moments_from_json(moments_to_json(m));
  EXPECT_EQ(back.grid, m.grid);
  EXPECT_EQ(back.mu_d, m.mu_d);
  EXPECT_EQ(back.var_d2, m.var_d2);
  EXPECT_EQ(back.cov_d1d2, m.cov_d1d2);
  EXPECT_EQ(back.sigma, m.sigma);
}

}  // namespace
}  // namespace scoretrend
